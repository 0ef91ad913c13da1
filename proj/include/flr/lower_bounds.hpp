#ifndef FLR_LOWER_BOUNDS_HPP
#define FLR_LOWER_BOUNDS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flr/common.hpp"
#include "flr/operator_core.hpp"
#include "flr/rng.hpp"

namespace flr {

/// Binary codebook with the zero word first and pairwise Hamming distance
/// strictly greater than M/8 (so at least floor(M/8) + 1).
struct Codebook {
  int word_length = 0;  // M
  std::vector<std::vector<std::uint8_t>> words;

  int n_hypotheses() const { return static_cast<int>(words.size()) - 1; }  // N
};

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

/// Randomized greedy search for a codebook with N >= 2^{M/8} nonzero words.
/// Every returned codebook passes verify_codebook; the search retries with
/// fresh substreams and fails with a resource error only after the budget
/// is exhausted.
Codebook varshamov_gilbert(int m, RngStream& rng);

/// Exhaustive pairwise check: zero word present, all distances > M/8,
/// N >= 2^{M/8}.
bool verify_codebook(const Codebook& codebook);

enum class FamilyKind { Commutative, NonCommutative };

/// Slope for one codeword on basis coordinates M+1..2M (1-based):
/// commutative   f_theta[k+M] = theta_k M^{-1/2} mu_{k+M}^alpha,
/// non-commutative f_theta[k+M] = theta_k M^{-1/2} mu_{k+M}^{1/2} tau_{k+M}^s.
/// Operators must be diagonal in the construction basis with dim >= 2M.
Vector hypothesis_slope(const std::vector<std::uint8_t>& theta, int m, double smoothness,
                        FamilyKind kind, const SpectralOperator& t_op, const SpectralOperator& c_op);

struct HypothesisFamily {
  Codebook codebook;
  FamilyKind kind = FamilyKind::Commutative;
  double smoothness = 0.5;  // alpha or s
  std::vector<Vector> slopes;  // one per codeword, length 2M
};

HypothesisFamily build_hypothesis_family(Codebook codebook, double smoothness, FamilyKind kind,
                                         const SpectralOperator& t_op, const SpectralOperator& c_op);

/// KL divergence between the two regression models with Gaussian noise:
/// n/(2 sigma^2) ||C^{1/2}(f1 - f2)||^2.
double kl_divergence(const Vector& f1, const Vector& f2, double n, double sigma2,
                     const SpectralOperator& c_op);

struct SeparationReport {
  int m = 0;
  int n_words = 0;       // N
  int hamming_min = 0;
  bool codebook_ok = false;
  std::optional<double> min_h;  // empty when the slopes are outside H
  double min_l2 = 0.0;
  double min_pred = 0.0;        // seminorm ||C^{1/2}(f - f')||, not squared
  double max_kl = 0.0;          // max over j of KL(P_j, P_0)
  double mean_kl = 0.0;         // mean over j of KL(P_j, P_0)
  double kl_budget = 0.0;       // u log N
  double u = 0.0;
  double n_samples = 0.0;
  double sigma2 = 0.0;
  bool budget_ok = false;

  nlohmann::json to_json() const;
};

/// All pairwise separations in the three norms plus the KL budget check of
/// the two-point argument: mean_j KL(P_j, P_0) <= u log N.
SeparationReport separation_report(const HypothesisFamily& family, const SpectralOperator& t_op,
                                   const SpectralOperator& c_op, double n, double sigma2, double u);

}  // namespace flr

#endif  // FLR_LOWER_BOUNDS_HPP
