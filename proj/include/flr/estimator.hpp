#ifndef FLR_ESTIMATOR_HPP
#define FLR_ESTIMATOR_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flr/common.hpp"
#include "flr/filters.hpp"
#include "flr/metrics.hpp"
#include "flr/operator_core.hpp"
#include "flr/simulate.hpp"

namespace flr {

struct FitResult {
  Vector beta_hat;
  double lambda_used = 0.0;
  std::string filter_kind;
  double eff_dim = 0.0;             // N(lambda) of the empirical sandwich
  double lambda_hat_max_eig = 0.0;  // top eigenvalue of Lambda_hat
  int n = 0;
  bool lambda_clamped = false;      // schedule exceeded the empirical spectrum

  nlohmann::json to_json() const;
};

/// (1/n) X^T X. Entries are accumulated with the order-independent exact
/// accumulator, so permuting the sample rows reproduces the operator (and
/// everything downstream of it) bit for bit.
SpectralOperator empirical_covariance(const Matrix& x_coeffs);
Matrix empirical_covariance_matrix(const Matrix& x_coeffs);

/// (1/n) X^T y, accumulated the same way.
Vector empirical_xy(const Matrix& x_coeffs, const Vector& y);

/// Per-dataset fitting state: the empirical moments and the eigensystem of
/// Lambda_hat = T^{1/2} C_hat T^{1/2} are computed once, after which fits at
/// different (filter, lambda) cost only matrix-vector work.
class FitContext {
 public:
  FitContext(const SpectralOperator& t_op, const Matrix& x_coeffs, const Vector& y);

  FitResult fit(const FilterFamily& family, double lambda) const;
  const SpectralOperator& lambda_hat() const { return lambda_hat_; }
  const Vector& xy() const { return xy_; }
  const Matrix& covariance_matrix() const { return c_hat_; }
  int n() const { return n_; }

 private:
  int n_ = 0;
  SpectralOperator t_half_;
  Matrix c_hat_;
  SpectralOperator lambda_hat_;
  Vector xy_;
  Vector t_half_xy_;
};

/// beta_hat = T^{1/2} g_lambda(Lambda_hat) T^{1/2} R_hat. A lambda above the
/// empirical spectrum is clamped to lambda_max(Lambda_hat) and flagged.
FitResult fit_flr(const SpectralOperator& t_op, const Matrix& x_coeffs, const Vector& y,
                  const FilterFamily& family, double lambda);

/// Tikhonov through the kernel-space normal equations: solve
/// (G/n + lambda I) a = y/n with G_kl = <x_k, T x_l>, then beta_hat = T X^T a.
/// Must agree with fit_flr(Tikhonov) up to solver roundoff.
FitResult fit_tikhonov_representer(const SpectralOperator& t_op, const Matrix& x_coeffs,
                                   const Vector& y, double lambda);

/// Which theorem's schedule and error norm an experiment targets.
enum class RateSetting {
  CommutativeL2,
  CommutativeRkhs,
  CommutativePrediction,
  NoncommutativeRkhs,
  NoncommutativePrediction,
};

std::string to_string(RateSetting setting);

struct RateParams {
  double t = 0.0;
  double c = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  double s = 0.0;
  double nu = 1.0;  // qualification; +infinity allowed
};

/// The effective smoothness r of the relevant theorem (the min rule).
double theorem_r(RateSetting setting, const RateParams& params);

/// The theorem's lambda schedule at sample size n (constant factor 1).
double choose_lambda_theorem(RateSetting setting, double n, const RateParams& params);

/// Grid argmin of the chosen true-error metric ("l2", "rkhs" or "pred");
/// ties resolve to the smallest lambda. Requires recorded truth.
double choose_lambda_oracle(const Dataset& dataset, const FilterFamily& family,
                            const std::string& metric, const std::vector<double>& lambda_grid);

}  // namespace flr

#endif  // FLR_ESTIMATOR_HPP
