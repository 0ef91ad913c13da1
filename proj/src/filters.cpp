#include "flr/filters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flr {

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Tikhonov: return "tikhonov";
    case FilterKind::SpectralCutoff: return "cutoff";
    case FilterKind::Showalter: return "showalter";
    case FilterKind::Landweber: return "landweber";
  }
  throw PreconditionError("unknown filter kind");
}

FilterKind filter_from_string(const std::string& name) {
  if (name == "tikhonov") return FilterKind::Tikhonov;
  if (name == "cutoff") return FilterKind::SpectralCutoff;
  if (name == "showalter") return FilterKind::Showalter;
  if (name == "landweber") return FilterKind::Landweber;
  throw ParseError("unknown filter name: \"" + name +
                   "\" (expected tikhonov, cutoff, showalter or landweber)");
}

double FilterFamily::declared_omega(double p) const {
  require(p > 0.0, "declared_omega: p must be positive");
  switch (kind) {
    case FilterKind::Tikhonov:
      if (p > 1.0) return std::numeric_limits<double>::quiet_NaN();
      // sup of sigma^p lambda^{1-p} / (sigma + lambda) = p^p (1-p)^{1-p} <= 1
      return 1.0;
    case FilterKind::SpectralCutoff:
      return 1.0;  // sigma^p 1[sigma < lambda] <= lambda^p
    case FilterKind::Showalter:
    case FilterKind::Landweber:
      // sup_x x^p e^{-x} = (p/e)^p; Landweber approaches the same limit from below.
      return std::exp(p * (std::log(p) - 1.0));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

long landweber_iterations(double lambda) {
  require(lambda > 0.0, "landweber_iterations: lambda must be positive");
  const double raw = std::ceil(1.0 / lambda);
  return static_cast<long>(std::min(raw, 1e5));
}

namespace {

void check_domain(double lambda, double sigma, const SpectrumDomain& dom) {
  if (!(lambda > 0.0) || !(lambda <= dom.eta) || !(sigma >= 0.0) || !(sigma <= dom.eta)) {
    std::ostringstream msg;
    msg << "filter domain violation: need 0 < lambda <= eta and 0 <= sigma <= eta, got lambda="
        << lambda << " sigma=" << sigma << " eta=" << dom.eta;
    throw PreconditionError(msg.str());
  }
}

double landweber_sum(long t, double sigma) {
  // sum_{i=0}^{t-1} (1-sigma)^i = (1 - (1-sigma)^t) / sigma
  if (sigma == 0.0) return static_cast<double>(t);
  return -std::expm1(static_cast<double>(t) * std::log1p(-sigma)) / sigma;
}

}  // namespace

double eval_filter(const FilterFamily& family, double lambda, double sigma,
                   const SpectrumDomain& dom) {
  check_domain(lambda, sigma, dom);
  switch (family.kind) {
    case FilterKind::Tikhonov:
      return 1.0 / (sigma + lambda);
    case FilterKind::SpectralCutoff:
      return sigma >= lambda ? 1.0 / sigma : 0.0;
    case FilterKind::Showalter:
      return sigma == 0.0 ? 1.0 / lambda : -std::expm1(-sigma / lambda) / sigma;
    case FilterKind::Landweber: {
      require(dom.eta <= 1.0, "Landweber requires eta <= 1; rescale the spectrum first");
      return landweber_sum(landweber_iterations(lambda), sigma);
    }
  }
  throw PreconditionError("unknown filter kind");
}

double eval_residual(const FilterFamily& family, double lambda, double sigma,
                     const SpectrumDomain& dom) {
  check_domain(lambda, sigma, dom);
  switch (family.kind) {
    case FilterKind::Tikhonov:
      return lambda / (sigma + lambda);
    case FilterKind::SpectralCutoff:
      return sigma >= lambda ? 0.0 : 1.0;
    case FilterKind::Showalter:
      return std::exp(-sigma / lambda);
    case FilterKind::Landweber: {
      require(dom.eta <= 1.0, "Landweber requires eta <= 1; rescale the spectrum first");
      const long t = landweber_iterations(lambda);
      return sigma == 0.0 ? 1.0 : std::exp(static_cast<double>(t) * std::log1p(-sigma));
    }
  }
  throw PreconditionError("unknown filter kind");
}

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    g[static_cast<std::size_t>(i)] = std::exp(llo + f * (lhi - llo));
  }
  g.back() = hi;
  return g;
}

struct GridSup {
  double a = 0.0, b = 0.0, d = 0.0;
  std::vector<double> omega;
  std::vector<double> worst_lambda, worst_sigma;
};

GridSup scan_grid(const FilterFamily& family, double eta, const std::vector<double>& p_list,
                  const std::vector<double>& lambdas, const std::vector<double>& sigmas) {
  const SpectrumDomain dom{eta};
  GridSup sup;
  sup.omega.assign(p_list.size(), 0.0);
  sup.worst_lambda.assign(p_list.size(), 0.0);
  sup.worst_sigma.assign(p_list.size(), 0.0);
  for (double lambda : lambdas) {
    // The Landweber parameter is genuinely t^{-1}; snap grid lambdas onto it
    // so the axiom ratios are measured at admissible parameter values.
    double lambda_eff = lambda;
    if (family.kind == FilterKind::Landweber) {
      lambda_eff = eta / static_cast<double>(landweber_iterations(lambda / eta));
    }
    for (double sigma : sigmas) {
      const double g = eval_filter(family, lambda_eff, sigma, dom);
      const double r = eval_residual(family, lambda_eff, sigma, dom);
      if (!std::isfinite(g) || !std::isfinite(r)) {
        std::ostringstream msg;
        msg << "non-finite filter evaluation for " << to_string(family.kind)
            << " at lambda=" << lambda_eff << " sigma=" << sigma;
        throw NumericError(msg.str());
      }
      sup.a = std::max(sup.a, std::abs(sigma * g));
      sup.b = std::max(sup.b, std::abs(lambda_eff * g));
      sup.d = std::max(sup.d, std::abs(r));
      for (std::size_t k = 0; k < p_list.size(); ++k) {
        const double p = p_list[k];
        const double ratio = std::abs(r) * std::pow(sigma / lambda_eff, p);
        if (ratio > sup.omega[k]) {
          sup.omega[k] = ratio;
          sup.worst_lambda[k] = lambda_eff;
          sup.worst_sigma[k] = sigma;
        }
      }
    }
  }
  return sup;
}

}  // namespace

CertifiedConstants certify_constants(const FilterFamily& family, double eta,
                                     const std::vector<double>& p_list,
                                     int sigma_grid, int lambda_grid) {
  require(eta > 0.0, "certify_constants: eta must be positive");
  require(sigma_grid >= 8 && lambda_grid >= 4, "certify_constants: grid too small");
  for (double p : p_list) require(p > 0.0, "certify_constants: p values must be positive");

  // Landweber axioms are stated for spectra in [0, 1]; certify on the rescaled domain.
  const double eta_eff = family.kind == FilterKind::Landweber ? 1.0 : eta;

  const auto sigmas = log_grid(1e-10 * eta_eff, eta_eff, sigma_grid);
  const auto lambdas = log_grid(1e-6 * eta_eff, eta_eff, lambda_grid);
  const GridSup base = scan_grid(family, eta_eff, p_list, lambdas, sigmas);

  // Refinement pass: twice the resolution and two more decades of small lambda.
  // A sup that is stable under this refinement is a genuine finite constant;
  // one that keeps growing marks p beyond the qualification.
  const auto sigmas_fine = log_grid(1e-10 * eta_eff, eta_eff, 2 * sigma_grid);
  const auto lambdas_fine = log_grid(1e-8 * eta_eff, eta_eff, 2 * lambda_grid);
  const GridSup fine = scan_grid(family, eta_eff, p_list, lambdas_fine, sigmas_fine);

  CertifiedConstants out;
  out.a = base.a;
  out.b = base.b;
  out.d = base.d;
  out.omega.resize(p_list.size());
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    auto& e = out.omega[k];
    e.p = p_list[k];
    e.value = base.omega[k];
    e.refined_value = fine.omega[k];
    e.worst_lambda = fine.worst_lambda[k];
    e.worst_sigma = fine.worst_sigma[k];
    e.certified = std::isfinite(fine.omega[k]) &&
                  fine.omega[k] <= 1.5 * std::max(base.omega[k], 1e-300);
  }
  return out;
}

}  // namespace flr
