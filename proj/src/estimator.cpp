#include "flr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flr/exact_sum.hpp"

namespace flr {

nlohmann::json FitResult::to_json() const {
  nlohmann::json j;
  j["beta_hat"] = std::vector<double>(beta_hat.data(), beta_hat.data() + beta_hat.size());
  j["lambda_used"] = lambda_used;
  j["filter_kind"] = filter_kind;
  j["diagnostics"] = {{"eff_dim", eff_dim},
                      {"lambda_hat_max_eig", lambda_hat_max_eig},
                      {"n", n},
                      {"lambda_clamped", lambda_clamped}};
  return j;
}

Matrix empirical_covariance_matrix(const Matrix& x_coeffs) {
  const Index n = x_coeffs.rows();
  const Index m = x_coeffs.cols();
  require(n >= 1, "empirical_covariance: need n >= 1");
  if (!x_coeffs.allFinite()) throw NumericError("empirical_covariance: non-finite entries");
  Matrix c(m, m);
  const double inv_n = 1.0 / static_cast<double>(n);
  ExactAccumulator acc;
  for (Index i = 0; i < m; ++i) {
    const double* col_i = x_coeffs.col(i).data();
    for (Index j = i; j < m; ++j) {
      const double* col_j = x_coeffs.col(j).data();
      acc.reset();
      for (Index k = 0; k < n; ++k) acc.add(col_i[k] * col_j[k]);
      const double v = acc.value() * inv_n;
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

SpectralOperator empirical_covariance(const Matrix& x_coeffs) {
  return SpectralOperator(empirical_covariance_matrix(x_coeffs));
}

Vector empirical_xy(const Matrix& x_coeffs, const Vector& y) {
  const Index n = x_coeffs.rows();
  const Index m = x_coeffs.cols();
  require(y.size() == n, "empirical_xy: length mismatch");
  if (!x_coeffs.allFinite() || !y.allFinite()) throw NumericError("empirical_xy: non-finite entries");
  Vector r(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  ExactAccumulator acc;
  for (Index i = 0; i < m; ++i) {
    const double* col_i = x_coeffs.col(i).data();
    acc.reset();
    for (Index k = 0; k < n; ++k) acc.add(col_i[k] * y(k));
    r(i) = acc.value() * inv_n;
  }
  return r;
}

FitContext::FitContext(const SpectralOperator& t_op, const Matrix& x_coeffs, const Vector& y)
    : n_(static_cast<int>(x_coeffs.rows())),
      t_half_(frac_power(t_op, 0.5)),
      c_hat_(empirical_covariance_matrix(x_coeffs)),
      lambda_hat_(SpectralOperator::Zero(t_op.dim())),
      xy_(empirical_xy(x_coeffs, y)) {
  require(t_op.dim() == x_coeffs.cols(), "FitContext: T dimension does not match covariates");
  Matrix sym = t_half_.matrix() * c_hat_ * t_half_.matrix();
  lambda_hat_ = SpectralOperator(0.5 * (sym + sym.transpose()));
  t_half_xy_ = t_half_.matrix() * xy_;
}

FitResult FitContext::fit(const FilterFamily& family, double lambda) const {
  require(lambda > 0.0, "fit: lambda must be positive");
  FitResult result;
  result.n = n_;
  result.filter_kind = to_string(family.kind);
  result.lambda_hat_max_eig = lambda_hat_.max_eigenvalue();
  double lambda_used = lambda;
  if (result.lambda_hat_max_eig > 0.0 && lambda > result.lambda_hat_max_eig) {
    lambda_used = result.lambda_hat_max_eig;
    result.lambda_clamped = true;
  }
  result.lambda_used = lambda_used;
  result.eff_dim = effective_dimension(lambda_hat_, lambda_used);

  const double eta = std::max(result.lambda_hat_max_eig, lambda_used);
  Vector filtered(lambda_hat_.dim());
  if (family.kind == FilterKind::Landweber) {
    const SpectrumDomain dom{1.0};
    for (Index i = 0; i < filtered.size(); ++i)
      filtered(i) =
          eval_filter(family, lambda_used / eta, lambda_hat_.eigenvalues()(i) / eta, dom) / eta;
  } else {
    const SpectrumDomain dom{eta};
    for (Index i = 0; i < filtered.size(); ++i)
      filtered(i) = eval_filter(family, lambda_used, lambda_hat_.eigenvalues()(i), dom);
  }
  const Vector in_eigen = lambda_hat_.eigenvectors().transpose() * t_half_xy_;
  const Vector applied = lambda_hat_.eigenvectors() * filtered.cwiseProduct(in_eigen).eval();
  result.beta_hat = t_half_.matrix() * applied;
  if (!result.beta_hat.allFinite()) throw NumericError("fit: non-finite estimate");
  return result;
}

FitResult fit_flr(const SpectralOperator& t_op, const Matrix& x_coeffs, const Vector& y,
                  const FilterFamily& family, double lambda) {
  return FitContext(t_op, x_coeffs, y).fit(family, lambda);
}

FitResult fit_tikhonov_representer(const SpectralOperator& t_op, const Matrix& x_coeffs,
                                   const Vector& y, double lambda) {
  require(lambda > 0.0, "fit_tikhonov_representer: lambda must be positive");
  const Index n = x_coeffs.rows();
  require(y.size() == n && n >= 1, "fit_tikhonov_representer: length mismatch");
  require(t_op.dim() == x_coeffs.cols(), "fit_tikhonov_representer: T dimension mismatch");

  FitResult result;
  result.filter_kind = to_string(FilterKind::Tikhonov);
  result.n = static_cast<int>(n);
  const SpectralOperator lam_hat =
      sandwich(t_op, SpectralOperator(empirical_covariance_matrix(x_coeffs)));
  result.lambda_hat_max_eig = lam_hat.max_eigenvalue();
  // Same clamping rule as the spectral form, so the two routes stay equal.
  if (result.lambda_hat_max_eig > 0.0 && lambda > result.lambda_hat_max_eig) {
    lambda = result.lambda_hat_max_eig;
    result.lambda_clamped = true;
  }
  result.lambda_used = lambda;
  result.eff_dim = effective_dimension(lam_hat, lambda);

  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix tx = t_op.matrix() * x_coeffs.transpose();  // M x n
  Matrix gram = x_coeffs * tx;                             // G_kl = <x_k, T x_l>
  gram = (0.5 * (gram + gram.transpose())).eval();
  Matrix system = gram * inv_n + lambda * Matrix::Identity(n, n);
  Eigen::LDLT<Matrix> solver(system);
  if (solver.info() != Eigen::Success)
    throw NumericError("fit_tikhonov_representer: factorization failed");
  const Vector rhs = y * inv_n;
  const Vector a = solver.solve(rhs);
  const double residual = (system * a - rhs).norm();
  if (!(residual <= 1e-8 * std::max(rhs.norm(), 1e-300)))
    throw NumericError("fit_tikhonov_representer: ill-conditioned system (lambda too small)");
  result.beta_hat = tx * a;
  return result;
}

std::string to_string(RateSetting setting) {
  switch (setting) {
    case RateSetting::CommutativeL2: return "commutative-l2";
    case RateSetting::CommutativeRkhs: return "commutative-rkhs";
    case RateSetting::CommutativePrediction: return "commutative-pred";
    case RateSetting::NoncommutativeRkhs: return "noncommutative-rkhs";
    case RateSetting::NoncommutativePrediction: return "noncommutative-pred";
  }
  throw PreconditionError("unknown rate setting");
}

double theorem_r(RateSetting setting, const RateParams& p) {
  const double nu = p.nu;
  require(nu >= 0.5, "theorem_r: qualification below 1/2 is outside the theorems");
  switch (setting) {
    case RateSetting::CommutativeL2:
      require(p.alpha > 0.0 && p.t > 1.0 && p.c > 1.0, "theorem_r: commutative params out of range");
      return std::min(p.alpha, nu + (p.c / p.t) * (nu - 0.5));
    case RateSetting::CommutativeRkhs:
      require(p.t > 1.0 && p.c > 1.0, "theorem_r: commutative params out of range");
      if (p.alpha < 0.5)
        throw PreconditionError("theorem_r: the RKHS rate is stated only for alpha >= 1/2");
      return std::min(p.alpha, nu + (p.c / p.t) * nu + 0.5);
    case RateSetting::CommutativePrediction:
      require(p.alpha > 0.0 && p.t > 1.0 && p.c > 1.0, "theorem_r: commutative params out of range");
      return std::min(p.alpha, nu + 0.5 + nu * p.c / p.t);
    case RateSetting::NoncommutativeRkhs:
      require(p.s > 0.0 && p.b > 1.0, "theorem_r: noncommutative params out of range");
      return std::min(p.s, nu);
    case RateSetting::NoncommutativePrediction:
      require(p.s > 0.0 && p.b > 1.0, "theorem_r: noncommutative params out of range");
      return std::min(p.s, nu - 0.5);
  }
  throw PreconditionError("unknown rate setting");
}

double choose_lambda_theorem(RateSetting setting, double n, const RateParams& params) {
  require(n >= 2.0, "choose_lambda_theorem: n must be at least 2");
  const double r = theorem_r(setting, params);
  double exponent;
  switch (setting) {
    case RateSetting::CommutativeL2:
    case RateSetting::CommutativeRkhs:
    case RateSetting::CommutativePrediction:
      exponent = (params.t + params.c) / (1.0 + params.c + 2.0 * params.t * r);
      break;
    default:
      exponent = params.b / (1.0 + params.b + 2.0 * r * params.b);
      break;
  }
  return std::pow(n, -exponent);
}

double choose_lambda_oracle(const Dataset& dataset, const FilterFamily& family,
                            const std::string& metric, const std::vector<double>& lambda_grid) {
  require(!lambda_grid.empty(), "choose_lambda_oracle: empty grid");
  require(dataset.truth != nullptr, "choose_lambda_oracle: dataset has no recorded truth");
  require(metric == "l2" || metric == "rkhs" || metric == "pred",
          "choose_lambda_oracle: metric must be l2, rkhs or pred");
  const FitContext context(dataset.truth->t_op, dataset.x_coeffs, dataset.y);
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());  // ties resolve toward the smallest lambda
  double best_lambda = grid.front();
  double best_error = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    const FitResult fit = context.fit(family, lambda);
    const ErrorTriple err = error_triple(fit.beta_hat, *dataset.truth);
    double value;
    if (metric == "l2") {
      value = err.l2;
    } else if (metric == "pred") {
      value = err.pred;
    } else {
      if (!err.rkhs.has_value()) continue;
      value = *err.rkhs;
    }
    if (value < best_error) {
      best_error = value;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace flr
