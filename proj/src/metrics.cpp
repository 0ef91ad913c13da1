#include "flr/metrics.hpp"

#include <cmath>

namespace flr {

double l2_error(const Vector& delta) {
  if (!delta.allFinite()) throw NumericError("l2_error: non-finite entries");
  return delta.norm();
}

std::optional<double> rkhs_error(const Vector& delta, const SpectralOperator& t_op) {
  require(delta.size() == t_op.dim(), "rkhs_error: size mismatch");
  if (t_op.min_eigenvalue() < 0.0) throw PreconditionError("rkhs_error: T is not PSD");
  const double total = delta.squaredNorm();
  if (total == 0.0) return 0.0;
  const double cutoff = 1e-12 * std::max(t_op.max_eigenvalue(), 0.0);
  const Vector coeffs = t_op.eigenvectors().transpose() * delta;
  double sum = 0.0;
  double null_mass = 0.0;
  for (Index i = 0; i < coeffs.size(); ++i) {
    const double d = t_op.eigenvalues()(i);
    if (d > cutoff) {
      sum += coeffs(i) * coeffs(i) / d;
    } else {
      null_mass += coeffs(i) * coeffs(i);
    }
  }
  if (null_mass > 1e-8 * total) return std::nullopt;  // delta is not in H
  return std::sqrt(sum);
}

double prediction_error(const Vector& delta, const SpectralOperator& c_op) {
  require(delta.size() == c_op.dim(), "prediction_error: size mismatch");
  if (c_op.min_eigenvalue() < 0.0) throw PreconditionError("prediction_error: C is not PSD");
  return delta.dot(c_op.matrix() * delta);
}

ErrorTriple error_triple(const Vector& beta_hat, const DatasetTruth& truth) {
  const Vector delta = beta_hat - truth.beta_star;
  ErrorTriple e;
  e.l2 = l2_error(delta);
  e.rkhs = rkhs_error(delta, truth.t_op);
  e.pred = prediction_error(delta, truth.c_op);
  return e;
}

}  // namespace flr
