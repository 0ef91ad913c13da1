#ifndef FLR_KERNELS_HPP
#define FLR_KERNELS_HPP

#include <functional>
#include <string>
#include <vector>

#include "flr/common.hpp"
#include "flr/operator_core.hpp"

namespace flr {

/// Closed-form eigensystems on [0,1]. BrownianCov and CubicKernel share the
/// eigenfunctions sqrt(2) sin((i - 1/2) pi s); SyntheticPower is the plain
/// i^{-q} decay in an abstract orthonormal basis.
enum class AnalyticKind { BrownianCov, CubicKernel, SyntheticPower };

/// Eigenvalue of the integral operator: ((i-1/2)pi)^{-2} for BrownianCov,
/// ((i-1/2)pi)^{-4} for CubicKernel, i^{-q} for SyntheticPower. i >= 1.
double analytic_eigenvalue(AnalyticKind kind, int i, double power_exponent = 0.0);

/// sqrt(2) sin((i - 1/2) pi s), the shared orthonormal eigenfunction. i >= 1.
double sine_eigenfunction(int i, double s);

/// K(s,t) = |s-t|^3/12 - (s+t)^3/12 + s t on [0,1]^2.
double eval_cubic_kernel(double s, double t);

/// C(s,t) = min(s,t) on [0,1]^2.
double eval_brownian_cov(double s, double t);

/// Quadrature rule on [0,1]: strictly increasing points, positive weights
/// summing to 1.
struct QuadratureGrid {
  std::vector<double> points;
  std::vector<double> weights;

  static QuadratureGrid UniformTrapezoid(int n);
  void validate() const;
};

/// Symmetric Nystrom discretization W^{1/2} K W^{1/2}; its eigenvalues
/// approximate the integral operator spectrum. Rejects kernels whose grid
/// evaluation is asymmetric beyond 1e-10 relative.
SpectralOperator nystrom_discretize(const std::function<double(double, double)>& kernel,
                                    const QuadratureGrid& grid);

/// Reads curves sampled on grid.points (CSV: header "s, s_1, ..., s_G", rows
/// "curve_id, x(s_1), ..., x(s_G)") and projects each onto the first m_basis
/// sine eigenfunctions via weighted inner products. Returns n x m_basis.
Matrix ingest_curves(const std::string& csv_path, const QuadratureGrid& grid, int m_basis);

}  // namespace flr

#endif  // FLR_KERNELS_HPP
