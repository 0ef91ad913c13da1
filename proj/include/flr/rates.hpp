#ifndef FLR_RATES_HPP
#define FLR_RATES_HPP

#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flr/common.hpp"
#include "flr/estimator.hpp"
#include "flr/simulate.hpp"

namespace flr {

struct SlopeFit {
  double slope = 0.0;
  double stderr_value = 0.0;
};

/// OLS of log(error) on log(n). Needs >= 4 points with positive errors
/// (2 points suffice mathematically; 4 is the harness floor for a stderr
/// worth reporting).
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Theoretical decay exponent for the given setting at the theorem's r rule
/// (error ~ n^{-exponent}; prediction settings refer to the squared norm).
double theoretical_exponent(RateSetting setting, const RateParams& params);

struct RateReport {
  std::string setting;  // "commutative" or "noncommutative"
  std::string metric;   // "l2", "rkhs" or "pred"
  std::vector<int> n_grid;
  struct PerN {
    int n = 0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int undefined_count = 0;  // RKHS errors outside H, excluded from aggregation
  };
  std::vector<PerN> per_n;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  double theory_exponent = 0.0;  // positive; compare fitted_slope to -theory_exponent
  double tolerance = 0.0;
  std::string lambda_rule;
  std::string verdict;  // "pass", "fail" or "withheld"
  double fitted_b = 0.0;
  int replicates = 0;
  std::vector<std::tuple<int, int, double>> raw;  // (n, replicate, error)

  nlohmann::json to_json() const;
  std::string to_csv() const;  // columns: setting,metric,n,replicate,error
};

struct HarnessParams {
  std::vector<int> n_grid = {128, 256, 512, 1024, 2048, 4096, 8192};
  int replicates = 50;
  std::string lambda_rule = "theorem";  // or "oracle"
  std::vector<std::string> metrics;     // default: per mode (l2/pred or rkhs/pred)
  double tol_estimation = 0.08;
  double tol_prediction = 0.12;
};

/// Runs the (n, replicate) grid with per-metric theorem schedules, aggregates
/// medians and quartiles and fits the log-log slope per metric. Replicate
/// cells execute in parallel on independent streams; aggregation is ordered,
/// so results do not depend on the worker count.
std::vector<RateReport> run_rate_experiment(const Scenario& scenario, const HarnessParams& params,
                                            unsigned threads);

/// Qualification-saturation comparison: median L2 error of spectral cut-off
/// vs Tikhonov at a single n, each with its own theorem schedule.
struct SaturationReport {
  int n = 0;
  int replicates = 0;
  double median_cutoff = 0.0;
  double median_tikhonov = 0.0;
  double lambda_cutoff = 0.0;
  double lambda_tikhonov = 0.0;
  bool cutoff_not_worse = false;

  nlohmann::json to_json() const;
};

SaturationReport run_saturation_experiment(const Scenario& scenario, int n, int replicates,
                                           unsigned threads);

}  // namespace flr

#endif  // FLR_RATES_HPP
