#ifndef FLR_OPERATOR_CORE_HPP
#define FLR_OPERATOR_CORE_HPP

#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "flr/common.hpp"
#include "flr/filters.hpp"

namespace flr {

/// Dense symmetric PSD operator in a truncated orthonormal L2 basis, with the
/// eigendecomposition computed once at construction (eigenvalues descending,
/// negative roundoff eigenvalues clamped to zero). Immutable after
/// construction; safe to share across threads.
class SpectralOperator {
 public:
  /// Validates near-symmetry (|a_ij - a_ji| <= tol * max|a|), symmetrizes,
  /// eigendecomposes and clamps roundoff-negative eigenvalues.
  explicit SpectralOperator(Matrix symmetric, double symmetry_tol = 1e-12);

  static SpectralOperator FromDiagonal(const Vector& diag);
  static SpectralOperator Zero(Index dim);
  static SpectralOperator Identity(Index dim);

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  /// Eigenvalues in descending order, clamped to be nonnegative where the
  /// negativity is roundoff-level.
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Orthonormal eigenvectors as columns, matching eigenvalues().
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double max_eigenvalue() const { return dim() == 0 ? 0.0 : eigenvalues_(0); }
  double min_eigenvalue() const { return dim() == 0 ? 0.0 : eigenvalues_(dim() - 1); }

  nlohmann::json to_json() const;
  static SpectralOperator from_json(const nlohmann::json& j);

  /// Internal fast path for results whose eigensystem is already known
  /// (fractional powers, filtered operators). Sorts descending.
  static SpectralOperator with_eigensystem(Matrix matrix, Vector eigenvalues, Matrix eigenvectors);

 private:
  SpectralOperator() = default;
  Matrix matrix_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

/// U diag(d_i^p) U^T with 0^0 := 1 and 0^p := 0 for p > 0. Requires p >= 0.
SpectralOperator frac_power(const SpectralOperator& a, double p);

/// U diag(g_lambda(d_i)) U^T. eta defaults to max(lambda_max(a), lambda).
/// Landweber is evaluated on the spectrum rescaled by 1/eta and scaled back.
SpectralOperator apply_filter(const FilterFamily& family, double lambda, const SpectralOperator& a,
                              std::optional<double> eta = std::nullopt);

/// T^{1/2} C T^{1/2}, symmetrized as (B + B^T)/2.
SpectralOperator sandwich(const SpectralOperator& t, const SpectralOperator& c);

/// Effective dimension trace(Lambda (Lambda + lambda I)^{-1}).
double effective_dimension(const SpectralOperator& lambda_op, double lambda);

/// Computes T^{1/2} g_lambda(T^{1/2} A T^{1/2}) T^{1/2} two ways -- directly,
/// and through the eigensystem construction that identifies it with
/// J g_lambda(J* A J) J* -- and returns the relative Frobenius deviation.
/// Null modes of A below 1e-12 * max eigenvalue fold into the g_lambda(0) term.
double verify_jt_identity(const SpectralOperator& a, const SpectralOperator& t,
                          const FilterFamily& family, double lambda);

}  // namespace flr

#endif  // FLR_OPERATOR_CORE_HPP
