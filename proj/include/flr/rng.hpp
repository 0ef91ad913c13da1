#ifndef FLR_RNG_HPP
#define FLR_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "flr/common.hpp"

namespace flr {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based stream: splitmix64 keyed by a hash of (base_seed, labels).
/// Draw sequences are bit-identical across platforms and runs; distinct
/// label paths give statistically independent streams.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform in (0, 1]; never returns 0, so log() is safe.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch, two uniforms per draw).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Unbiased integer in [0, bound).
  std::uint64_t uniform_below(std::uint64_t bound) {
    require(bound > 0, "uniform_below: bound must be positive");
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_ = 0;
};

/// Derives the stream keyed by hash(base_seed, labels...). Identical paths
/// give identical streams; the derivation is order sensitive in the labels.
inline RngStream derive_stream(std::uint64_t base_seed, std::span<const std::uint64_t> labels) {
  std::uint64_t key = detail::mix64(base_seed ^ 0xA0761D6478BD642FULL);
  for (const std::uint64_t label : labels) {
    key = detail::mix64(key ^ (detail::mix64(label) + 0x9E3779B97F4A7C15ULL));
  }
  return RngStream(key);
}

inline RngStream derive_stream(std::uint64_t base_seed, std::initializer_list<std::uint64_t> labels) {
  return derive_stream(base_seed, std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

}  // namespace flr

#endif  // FLR_RNG_HPP
