#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "flr/exact_sum.hpp"
#include "flr/parallel.hpp"
#include "flr/rng.hpp"

using namespace flr;

TEST_CASE("identical seed and labels reproduce the stream") {
  RngStream a = derive_stream(42, {1, 2, 3});
  RngStream b = derive_stream(42, {1, 2, 3});
  for (int i = 0; i < 10000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct labels give uncorrelated streams") {
  RngStream a = derive_stream(7, {1});
  RngStream b = derive_stream(7, {2});
  const int n = 10000;
  double sum_ab = 0.0, sum_a = 0.0, sum_b = 0.0, sum_a2 = 0.0, sum_b2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = a.normal();
    const double y = b.normal();
    sum_ab += x * y;
    sum_a += x;
    sum_b += y;
    sum_a2 += x * x;
    sum_b2 += y * y;
  }
  const double cov = sum_ab / n - (sum_a / n) * (sum_b / n);
  const double corr = cov / std::sqrt((sum_a2 / n - std::pow(sum_a / n, 2)) *
                                      (sum_b2 / n - std::pow(sum_b / n, 2)));
  CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("base seed changes the stream") {
  RngStream a = derive_stream(1, {5});
  RngStream b = derive_stream(2, {5});
  int differing = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() != b.next_u64()) ++differing;
  CHECK(differing > 60);
}

TEST_CASE("normal draws have the right first two moments") {
  RngStream rng = derive_stream(11, {0});
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_below stays in range and covers it") {
  RngStream rng = derive_stream(3, {9});
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::uint64_t v = rng.uniform_below(7);
    REQUIRE(v < 7);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("exact accumulator is invariant under permutation") {
  RngStream rng = derive_stream(17, {4});
  std::vector<double> xs(4096);
  for (auto& x : xs) x = rng.normal() * std::exp(40.0 * (rng.uniform01() - 0.5));
  ExactAccumulator forward;
  for (double x : xs) forward.add(x);
  // a few deterministic shuffles
  for (int round = 0; round < 5; ++round) {
    for (std::size_t i = xs.size() - 1; i > 0; --i)
      std::swap(xs[i], xs[rng.uniform_below(i + 1)]);
    ExactAccumulator shuffled;
    for (double x : xs) shuffled.add(x);
    const double a = forward.value();
    const double b = shuffled.value();
    REQUIRE(std::memcmp(&a, &b, sizeof(double)) == 0);
  }
}

TEST_CASE("exact accumulator survives catastrophic cancellation") {
  ExactAccumulator acc;
  acc.add(1e308);
  acc.add(1.0);
  acc.add(-1e308);
  CHECK(acc.value() == 1.0);

  acc.reset();
  acc.add(0x1.0p-1074);  // smallest subnormal
  acc.add(0x1.0p-1074);
  CHECK(acc.value() == 0x1.0p-1073);

  acc.reset();
  CHECK(acc.value() == 0.0);

  acc.reset();
  for (int i = 0; i < 1000; ++i) {
    acc.add(0.1);
    acc.add(-0.1);
  }
  CHECK(acc.value() == 0.0);
}

TEST_CASE("exact accumulator matches a compensated reference") {
  RngStream rng = derive_stream(23, {0});
  ExactAccumulator acc;
  long double reference = 0.0L;
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.normal() * std::exp(20.0 * (rng.uniform01() - 0.5));
    acc.add(x);
    reference += static_cast<long double>(x);
  }
  const double got = acc.value();
  CHECK(got == doctest::Approx(static_cast<double>(reference)).epsilon(1e-12));
}

TEST_CASE("exact accumulator handles signed totals") {
  ExactAccumulator acc;
  acc.add(-1.0);
  CHECK(acc.value() == -1.0);
  acc.add(-0x1.0p-52);  // -(1 + 2^-52) is exactly representable
  CHECK(acc.value() == -(1.0 + 0x1.0p-52));
  acc.reset();
  acc.add(3.5);
  acc.add(-10.25);
  CHECK(acc.value() == -6.75);
}

TEST_CASE("parallel_for covers every index and propagates exceptions") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] = 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);

  CHECK_THROWS_AS(
      parallel_for(16, 4, [&](std::size_t i) { if (i == 7) throw NumericError("boom"); }),
      NumericError);
}

TEST_CASE("resolve_thread_count is positive") { CHECK(resolve_thread_count() >= 1); }
