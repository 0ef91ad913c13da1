#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "flr/rates.hpp"
#include "flr/rng.hpp"

using namespace flr;

TEST_CASE("slope fit recovers exact power laws") {
  std::vector<std::pair<double, double>> points;
  for (double n : {100.0, 200.0, 400.0, 800.0, 1600.0}) points.emplace_back(n, std::pow(n, -0.5));
  const SlopeFit fit = fit_loglog_slope(points);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.stderr_value <= 1e-12);

  points.clear();
  for (double n : {128.0, 256.0, 512.0, 1024.0}) points.emplace_back(n, 3.0 * std::pow(n, -0.857));
  CHECK(fit_loglog_slope(points).slope == doctest::Approx(-0.857).epsilon(1e-12));

  CHECK_THROWS_AS(fit_loglog_slope({{100.0, 0.0}, {200.0, 1.0}}), PreconditionError);
}

TEST_CASE("slope fit under lognormal noise stays within 3 stderr most of the time") {
  int hits = 0;
  const int trials = 60;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng = derive_stream(500 + trial, {1});
    std::vector<std::pair<double, double>> points;
    for (int k = 0; k < 8; ++k) {
      const double n = 128.0 * std::pow(2.0, k);
      points.emplace_back(n, std::pow(n, -0.7) * std::exp(0.05 * rng.normal()));
    }
    const SlopeFit fit = fit_loglog_slope(points);
    if (std::abs(fit.slope + 0.7) <= 3.0 * fit.stderr_value) ++hits;
  }
  CHECK(hits >= static_cast<int>(0.95 * trials) - 1);
}

TEST_CASE("theoretical exponents at pinned parameters") {
  RateParams comm;
  comm.t = 4.0;
  comm.c = 2.0;
  comm.alpha = 0.5;
  comm.nu = 1.0;
  CHECK(theoretical_exponent(RateSetting::CommutativeL2, comm) ==
        doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(theoretical_exponent(RateSetting::CommutativePrediction, comm) ==
        doctest::Approx(6.0 / 7.0).epsilon(1e-12));

  RateParams noncomm;
  noncomm.b = 2.0;
  noncomm.s = 1.0;
  noncomm.nu = 1.0;
  CHECK(theoretical_exponent(RateSetting::NoncommutativeRkhs, noncomm) ==
        doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  // r = min{1, 1/2} = 1/2 plugged into b(2r+1)/(1+b+2rb)
  CHECK(theoretical_exponent(RateSetting::NoncommutativePrediction, noncomm) ==
        doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("exponents increase in the source exponent until saturation, then freeze") {
  for (RateSetting setting : {RateSetting::CommutativeL2, RateSetting::CommutativePrediction}) {
    RateParams params;
    params.t = 4.0;
    params.c = 2.0;
    params.nu = 1.0;
    double previous = -1.0;
    double at_saturation = -1.0;
    for (double alpha = 0.55; alpha < 6.0; alpha += 0.25) {
      params.alpha = alpha;
      const double value = theoretical_exponent(setting, params);
      CHECK(value >= previous - 1e-12);
      previous = value;
      if (alpha > 4.0) {
        if (at_saturation < 0.0) at_saturation = value;
        CHECK(value == doctest::Approx(at_saturation).epsilon(1e-12));
      }
    }
  }
  RateParams params;
  params.b = 6.0;
  params.nu = 1.0;
  double previous = -1.0;
  for (double s = 0.1; s < 3.0; s += 0.1) {
    params.s = s;
    const double value = theoretical_exponent(RateSetting::NoncommutativeRkhs, params);
    CHECK(value >= previous - 1e-12);
    previous = value;
  }
}

TEST_CASE("commutative and non-commutative exponents meet at the H boundary") {
  // identity mixing, b = t + c; s -> 0 matches alpha = 1/2 (both rates vanish)
  RateParams comm;
  comm.t = 4.0;
  comm.c = 2.0;
  comm.alpha = 0.5;
  comm.nu = 1.0;
  RateParams noncomm;
  noncomm.b = 6.0;
  noncomm.s = 1e-9;
  noncomm.nu = 1.0;
  const double comm_exponent = theoretical_exponent(RateSetting::CommutativeRkhs, comm);
  const double noncomm_exponent = theoretical_exponent(RateSetting::NoncommutativeRkhs, noncomm);
  CHECK(std::abs(comm_exponent) < 1e-12);
  CHECK(std::abs(noncomm_exponent - comm_exponent) < 1e-6);
}

namespace {
Scenario small_scenario() {
  Scenario scenario;
  scenario.dim = 16;
  scenario.sigma = 0.5;
  scenario.seed = 424242;
  return scenario;
}

HarnessParams small_params() {
  HarnessParams params;
  params.n_grid = {32, 64, 128, 256};
  params.replicates = 8;
  params.metrics = {"l2", "pred"};
  return params;
}
}  // namespace

TEST_CASE("small harness runs are deterministic and thread-count independent") {
  const Scenario scenario = small_scenario();
  const HarnessParams params = small_params();
  const auto reports1 = run_rate_experiment(scenario, params, 1);
  const auto reports2 = run_rate_experiment(scenario, params, 4);
  REQUIRE(reports1.size() == reports2.size());
  for (std::size_t i = 0; i < reports1.size(); ++i) {
    CHECK(reports1[i].to_json().dump() == reports2[i].to_json().dump());
    CHECK(reports1[i].to_csv() == reports2[i].to_csv());
    CHECK(reports1[i].verdict == "withheld");  // 8 replicates is underpowered
  }
}

TEST_CASE("noiseless oracle runs are flagged, not scored") {
  Scenario scenario = small_scenario();
  scenario.sigma = 0.0;
  scenario.filter = FilterKind::SpectralCutoff;
  scenario.dim = 512;  // n < M keeps the truncation residual visible
  HarnessParams params = small_params();
  params.replicates = 8;
  params.lambda_rule = "oracle";
  params.metrics = {"l2"};
  const auto reports = run_rate_experiment(scenario, params, 2);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].verdict == "withheld");
  // noiseless decay is far steeper than the noisy-rate exponent
  CHECK(reports[0].fitted_slope < -reports[0].theory_exponent);
}

TEST_CASE("rate report json carries the schema fields") {
  const auto reports = run_rate_experiment(small_scenario(), small_params(), 2);
  const nlohmann::json j = reports[0].to_json();
  for (const char* key : {"setting", "metric", "n_grid", "per_n", "fitted_slope", "slope_stderr",
                          "theory_exponent", "tolerance", "verdict"})
    CHECK(j.contains(key));
  const std::string csv = reports[0].to_csv();
  CHECK(csv.rfind("setting,metric,n,replicate,error\n", 0) == 0);
}

TEST_CASE("saturation comparison runs and is deterministic") {
  Scenario scenario;
  scenario.dim = 32;
  scenario.alpha = 3.0;
  scenario.sigma = 1e-3;
  scenario.seed = 777;
  const SaturationReport a = run_saturation_experiment(scenario, 512, 9, 2);
  const SaturationReport b = run_saturation_experiment(scenario, 512, 9, 1);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.median_cutoff > 0.0);
  CHECK(a.median_tikhonov > 0.0);
}
