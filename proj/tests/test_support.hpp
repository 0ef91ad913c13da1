#ifndef FLR_TEST_SUPPORT_HPP
#define FLR_TEST_SUPPORT_HPP

#include <cmath>

#include "flr/operator_core.hpp"
#include "flr/rng.hpp"

namespace flr::testing {

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
inline Matrix random_orthogonal(Index m, RngStream& rng) {
  Matrix g(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // fix the sign convention so the distribution is symmetric
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < m; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

/// Random PSD operator with eigenvalues log-uniform in [top/cond, top].
inline SpectralOperator random_psd(Index m, RngStream& rng, double cond = 1e3, double top = 1.0) {
  const Matrix q = random_orthogonal(m, rng);
  Vector d(m);
  for (Index i = 0; i < m; ++i)
    d(i) = top * std::exp(-std::log(cond) * rng.uniform01());
  const Matrix a = q * d.asDiagonal() * q.transpose();
  return SpectralOperator(0.5 * (a + a.transpose()));
}

}  // namespace flr::testing

#endif  // FLR_TEST_SUPPORT_HPP
