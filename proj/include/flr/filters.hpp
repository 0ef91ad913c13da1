#ifndef FLR_FILTERS_HPP
#define FLR_FILTERS_HPP

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "flr/common.hpp"

namespace flr {

enum class FilterKind { Tikhonov, SpectralCutoff, Showalter, Landweber };

std::string to_string(FilterKind kind);
FilterKind filter_from_string(const std::string& name);  // "tikhonov","cutoff","showalter","landweber"

/// Spectrum domain for filter evaluation: sigma in [0, eta], lambda in (0, eta].
struct SpectrumDomain {
  double eta = 1.0;
};

/// A regularization family g_lambda with its qualification and the constants
/// it is declared to satisfy:
///   |sigma g(sigma)| <= A,  |g(sigma)| <= B/lambda,  |1 - sigma g(sigma)| <= D,
///   |r(sigma)| sigma^p <= omega_p lambda^p for p up to the qualification.
struct FilterFamily {
  FilterKind kind = FilterKind::Tikhonov;

  /// Largest p for which the residual bound holds: 1 for Tikhonov,
  /// +infinity for the other three families.
  double qualification() const {
    return kind == FilterKind::Tikhonov ? 1.0 : std::numeric_limits<double>::infinity();
  }

  double declared_a() const { return 1.0; }
  double declared_b() const { return 1.0; }
  double declared_d() const { return 1.0; }

  /// omega_p for p within the qualification; NaN when p exceeds it.
  double declared_omega(double p) const;
};

/// Iteration count for the Landweber lambda <-> t identification t = ceil(1/lambda),
/// capped at 1e5 iterations.
long landweber_iterations(double lambda);

/// g_lambda(sigma) in closed form. Landweber uses t = ceil(1/lambda) and
/// requires eta <= 1 (callers filtering an operator rescale its spectrum first).
double eval_filter(const FilterFamily& family, double lambda, double sigma,
                   const SpectrumDomain& dom = {});

/// Residual r_lambda(sigma) = 1 - sigma * g_lambda(sigma).
double eval_residual(const FilterFamily& family, double lambda, double sigma,
                     const SpectrumDomain& dom = {});

/// Result of the numeric certification of the four filter axioms on a grid.
struct CertifiedConstants {
  double a = 0.0;  // sup |sigma g|
  double b = 0.0;  // sup lambda |g|
  double d = 0.0;  // sup |r|
  struct OmegaEntry {
    double p = 0.0;
    double value = 0.0;          // sup |r| sigma^p / lambda^p on the base grid
    double refined_value = 0.0;  // same sup on the refined/extended grid
    bool certified = false;      // false when the sup keeps growing under refinement
    double worst_lambda = 0.0;
    double worst_sigma = 0.0;
  };
  std::vector<OmegaEntry> omega;

  bool all_certified() const {
    for (const auto& e : omega)
      if (!e.certified) return false;
    return true;
  }
};

/// Certifies A, B, D and omega_p over a log grid of (sigma, lambda) covering
/// (0, eta]. For each p the sup is re-evaluated on a refined grid extended two
/// decades lower in lambda; a sup that grows under refinement is flagged as
/// not certified (p beyond the family's qualification). For Landweber the
/// grid lambda is snapped to 1/t, matching the t = ceil(1/lambda) map.
CertifiedConstants certify_constants(const FilterFamily& family, double eta,
                                     const std::vector<double>& p_list,
                                     int sigma_grid = 512, int lambda_grid = 16);

}  // namespace flr

#endif  // FLR_FILTERS_HPP
