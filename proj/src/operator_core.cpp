#include "flr/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace flr {

namespace {

void sort_descending(Vector& values, Matrix& vectors) {
  const Index m = values.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return values(i) > values(j); });
  Vector sorted_values(m);
  Matrix sorted_vectors(vectors.rows(), m);
  for (Index k = 0; k < m; ++k) {
    sorted_values(k) = values(order[static_cast<std::size_t>(k)]);
    sorted_vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  values.swap(sorted_values);
  vectors.swap(sorted_vectors);
}

void clamp_roundoff_negatives(Vector& values) {
  if (values.size() == 0) return;
  const double top = std::max(values.maxCoeff(), 0.0);
  const double floor = -1e-12 * top;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0 && values(i) >= floor) values(i) = 0.0;
  }
}

}  // namespace

SpectralOperator::SpectralOperator(Matrix symmetric, double symmetry_tol) {
  require(symmetric.rows() == symmetric.cols(), "SpectralOperator: matrix must be square");
  const double scale = symmetric.size() > 0 ? symmetric.cwiseAbs().maxCoeff() : 0.0;
  const double asym = symmetric.size() > 0 ? (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > symmetry_tol * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "SpectralOperator: input asymmetry " << asym << " exceeds tolerance "
        << symmetry_tol * scale;
    throw PreconditionError(msg.str());
  }
  matrix_ = 0.5 * (symmetric + symmetric.transpose());
  if (!matrix_.allFinite()) throw NumericError("SpectralOperator: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
  if (solver.info() != Eigen::Success) throw NumericError("SpectralOperator: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  sort_descending(eigenvalues_, eigenvectors_);
  clamp_roundoff_negatives(eigenvalues_);
}

SpectralOperator SpectralOperator::FromDiagonal(const Vector& diag) {
  const Index m = diag.size();
  Vector values = diag;
  Matrix vectors = Matrix::Identity(m, m);
  SpectralOperator op;
  op.matrix_ = diag.asDiagonal();
  sort_descending(values, vectors);
  clamp_roundoff_negatives(values);
  op.eigenvalues_ = std::move(values);
  op.eigenvectors_ = std::move(vectors);
  return op;
}

SpectralOperator SpectralOperator::Zero(Index dim) { return FromDiagonal(Vector::Zero(dim)); }

SpectralOperator SpectralOperator::Identity(Index dim) { return FromDiagonal(Vector::Ones(dim)); }

SpectralOperator SpectralOperator::with_eigensystem(Matrix matrix, Vector eigenvalues,
                                                    Matrix eigenvectors) {
  SpectralOperator op;
  op.matrix_ = std::move(matrix);
  op.eigenvalues_ = std::move(eigenvalues);
  op.eigenvectors_ = std::move(eigenvectors);
  sort_descending(op.eigenvalues_, op.eigenvectors_);
  clamp_roundoff_negatives(op.eigenvalues_);
  return op;
}

nlohmann::json SpectralOperator::to_json() const {
  nlohmann::json j;
  j["dim"] = dim();
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(dim() * dim()));
  for (Index i = 0; i < dim(); ++i)
    for (Index k = 0; k < dim(); ++k) entries.push_back(matrix_(i, k));
  j["matrix"] = entries;
  return j;
}

SpectralOperator SpectralOperator::from_json(const nlohmann::json& j) {
  const Index m = j.at("dim").get<Index>();
  const auto entries = j.at("matrix").get<std::vector<double>>();
  if (entries.size() != static_cast<std::size_t>(m * m))
    throw ParseError("SpectralOperator: matrix entry count does not match dim");
  Matrix mat(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k) mat(i, k) = entries[static_cast<std::size_t>(i * m + k)];
  return SpectralOperator(std::move(mat), 1e-10);
}

SpectralOperator frac_power(const SpectralOperator& a, double p) {
  require(p >= 0.0, "frac_power: negative exponents are not defined here");
  const Index m = a.dim();
  if (a.min_eigenvalue() < 0.0)
    throw PreconditionError("frac_power: operator is not PSD");
  if (p == 0.0) {
    return SpectralOperator::with_eigensystem(Matrix::Identity(m, m), Vector::Ones(m),
                                              a.eigenvectors());
  }
  Vector powered(m);
  for (Index i = 0; i < m; ++i) {
    const double d = a.eigenvalues()(i);
    powered(i) = d > 0.0 ? std::pow(d, p) : 0.0;
  }
  Matrix mat = a.eigenvectors() * powered.asDiagonal() * a.eigenvectors().transpose();
  mat = 0.5 * (mat + mat.transpose()).eval();
  return SpectralOperator::with_eigensystem(std::move(mat), std::move(powered), a.eigenvectors());
}

SpectralOperator apply_filter(const FilterFamily& family, double lambda, const SpectralOperator& a,
                              std::optional<double> eta) {
  const Index m = a.dim();
  if (a.min_eigenvalue() < 0.0) throw PreconditionError("apply_filter: operator is not PSD");
  const double top = a.max_eigenvalue();
  const double eta_eff = eta.value_or(std::max(top, lambda));
  require(eta_eff >= top, "apply_filter: eta must dominate the spectrum");
  Vector filtered(m);
  if (family.kind == FilterKind::Landweber) {
    // Rescale spectrum to [0, 1]; g for the scaled problem is eta^{-1} g(sigma/eta).
    const SpectrumDomain dom{1.0};
    for (Index i = 0; i < m; ++i)
      filtered(i) = eval_filter(family, lambda / eta_eff, a.eigenvalues()(i) / eta_eff, dom) / eta_eff;
  } else {
    const SpectrumDomain dom{eta_eff};
    for (Index i = 0; i < m; ++i)
      filtered(i) = eval_filter(family, lambda, a.eigenvalues()(i), dom);
  }
  Matrix mat = a.eigenvectors() * filtered.asDiagonal() * a.eigenvectors().transpose();
  mat = 0.5 * (mat + mat.transpose()).eval();
  return SpectralOperator::with_eigensystem(std::move(mat), std::move(filtered), a.eigenvectors());
}

SpectralOperator sandwich(const SpectralOperator& t, const SpectralOperator& c) {
  require(t.dim() == c.dim(), "sandwich: dimension mismatch");
  const SpectralOperator root = frac_power(t, 0.5);
  Matrix b = root.matrix() * c.matrix() * root.matrix();
  return SpectralOperator(0.5 * (b + b.transpose()));
}

double effective_dimension(const SpectralOperator& lambda_op, double lambda) {
  require(lambda > 0.0, "effective_dimension: lambda must be positive");
  if (lambda_op.min_eigenvalue() < 0.0)
    throw PreconditionError("effective_dimension: operator is not PSD");
  double sum = 0.0;
  for (Index i = 0; i < lambda_op.dim(); ++i) {
    const double tau = lambda_op.eigenvalues()(i);
    sum += tau / (tau + lambda);
  }
  return sum;
}

double verify_jt_identity(const SpectralOperator& a, const SpectralOperator& t,
                          const FilterFamily& family, double lambda) {
  require(a.dim() == t.dim(), "verify_jt_identity: dimension mismatch");
  const Index m = a.dim();
  const SpectralOperator lam = sandwich(t, a);
  const double eta = std::max(lam.max_eigenvalue(), lambda);

  // Route 1: direct evaluation of T^{1/2} g(T^{1/2} A T^{1/2}) T^{1/2}.
  const SpectralOperator t_half = frac_power(t, 0.5);
  const SpectralOperator filtered = apply_filter(family, lambda, lam, eta);
  const Matrix direct = t_half.matrix() * filtered.matrix() * t_half.matrix();

  // Route 2: the eigensystem construction behind the J-form. The nonzero
  // spectrum of J*AJ coincides with that of G = A^{1/2} T A^{1/2}; for each
  // eigenpair (m_i, v_i) of G the function phi_i = T A^{1/2} v_i / sqrt(m_i)
  // is an H-orthonormal eigenfunction of J*AJ, and
  //   J g(J*AJ) J* = sum_i g(m_i) phi_i phi_i^T + g(0) (T - sum_i phi_i phi_i^T).
  const SpectralOperator a_half = frac_power(a, 0.5);
  const SpectralOperator gram = sandwich(a, t);  // A^{1/2} T A^{1/2}
  double g0;
  if (family.kind == FilterKind::Landweber) {
    g0 = eval_filter(family, lambda / eta, 0.0, SpectrumDomain{1.0}) / eta;
  } else {
    g0 = eval_filter(family, lambda, 0.0, SpectrumDomain{eta});
  }
  Matrix jform = g0 * t.matrix();
  const double mode_floor = 1e-12 * std::max(gram.max_eigenvalue(), 0.0);
  for (Index i = 0; i < m; ++i) {
    const double mi = gram.eigenvalues()(i);
    if (mi <= mode_floor) continue;  // null modes stay in the g(0) term
    const Vector phi = t.matrix() * (a_half.matrix() * gram.eigenvectors().col(i)) / std::sqrt(mi);
    double gi;
    if (family.kind == FilterKind::Landweber) {
      gi = eval_filter(family, lambda / eta, std::min(mi / eta, 1.0), SpectrumDomain{1.0}) / eta;
    } else {
      gi = eval_filter(family, lambda, std::min(mi, eta), SpectrumDomain{eta});
    }
    jform += (gi - g0) * (phi * phi.transpose());
  }

  const double denom = std::max(direct.norm(), 1e-300);
  return (direct - jform).norm() / denom;
}

}  // namespace flr
