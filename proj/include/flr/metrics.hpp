#ifndef FLR_METRICS_HPP
#define FLR_METRICS_HPP

#include <optional>

#include "flr/common.hpp"
#include "flr/operator_core.hpp"
#include "flr/simulate.hpp"

namespace flr {

/// The three error functionals of the slope estimate. rkhs is empty when
/// delta has mass in the numerical null space of T (delta outside H).
struct ErrorTriple {
  double l2 = 0.0;
  std::optional<double> rkhs;
  double pred = 0.0;  // squared prediction error ||C^{1/2} delta||^2
};

/// ||delta||_{L2}: the basis is orthonormal, so this is the coefficient norm.
double l2_error(const Vector& delta);

/// ||delta||_H = sqrt(delta^T T^+ delta) through the pseudo-inverse on
/// eigenvalues above 1e-12 * lambda_max. Returns nullopt when more than
/// 1e-8 of ||delta||^2 lies in the null space of T.
std::optional<double> rkhs_error(const Vector& delta, const SpectralOperator& t_op);

/// ||C^{1/2} delta||^2 = delta^T C delta = E <delta, X>^2.
double prediction_error(const Vector& delta, const SpectralOperator& c_op);

ErrorTriple error_triple(const Vector& beta_hat, const DatasetTruth& truth);

}  // namespace flr

#endif  // FLR_METRICS_HPP
