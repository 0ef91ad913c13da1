#include "flr/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flr/metrics.hpp"

namespace flr {

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  require(a.size() == b.size(), "hamming_distance: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

Codebook varshamov_gilbert(int m, RngStream& rng) {
  require(m >= 8, "varshamov_gilbert: M must be at least 8");
  const int min_distance = m / 8 + 1;  // strict "> M/8" for integer distances
  const int target_nonzero = static_cast<int>(std::ceil(std::pow(2.0, m / 8.0)));
  constexpr int kCandidateBudget = 10000;
  constexpr int kRestartBudget = 8;

  for (int attempt = 0; attempt < kRestartBudget; ++attempt) {
    Codebook book;
    book.word_length = m;
    book.words.push_back(std::vector<std::uint8_t>(static_cast<std::size_t>(m), 0));
    bool stuck = false;
    while (book.n_hypotheses() < target_nonzero && !stuck) {
      stuck = true;
      for (int trial = 0; trial < kCandidateBudget; ++trial) {
        std::vector<std::uint8_t> candidate(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) candidate[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(rng.next_u64() & 1ULL);
        bool ok = true;
        for (const auto& word : book.words) {
          if (hamming_distance(candidate, word) < min_distance) {
            ok = false;
            break;
          }
        }
        if (ok) {
          book.words.push_back(std::move(candidate));
          stuck = false;
          break;
        }
      }
    }
    if (book.n_hypotheses() >= target_nonzero && verify_codebook(book)) return book;
    rng = RngStream(rng.next_u64());  // fresh substream for the retry
  }
  std::ostringstream msg;
  msg << "varshamov_gilbert: search budget exhausted at M=" << m;
  throw NumericError(msg.str());
}

bool verify_codebook(const Codebook& book) {
  const int m = book.word_length;
  if (m < 8 || book.words.empty()) return false;
  for (const auto& word : book.words)
    if (static_cast<int>(word.size()) != m) return false;
  for (std::uint8_t bit : book.words.front())
    if (bit != 0) return false;  // zero word must lead
  if (book.n_hypotheses() < std::pow(2.0, m / 8.0)) return false;
  for (std::size_t i = 0; i < book.words.size(); ++i) {
    for (std::size_t j = i + 1; j < book.words.size(); ++j) {
      if (8 * hamming_distance(book.words[i], book.words[j]) <= m) return false;
    }
  }
  return true;
}

namespace {
void require_diagonal(const SpectralOperator& op, const char* name) {
  const double scale = std::max(op.matrix().cwiseAbs().maxCoeff(), 1e-300);
  const double off = (op.matrix() - Matrix(op.matrix().diagonal().asDiagonal())).cwiseAbs().maxCoeff();
  if (off > 1e-12 * scale) {
    std::ostringstream msg;
    msg << name << " must be diagonal in the construction basis (off-diagonal mass " << off << ")";
    throw PreconditionError(msg.str());
  }
}
}  // namespace

Vector hypothesis_slope(const std::vector<std::uint8_t>& theta, int m, double smoothness,
                        FamilyKind kind, const SpectralOperator& t_op, const SpectralOperator& c_op) {
  require(static_cast<int>(theta.size()) == m, "hypothesis_slope: theta length mismatch");
  require(smoothness > 0.0, "hypothesis_slope: smoothness must be positive");
  require(t_op.dim() >= 2 * m && c_op.dim() == t_op.dim(),
          "hypothesis_slope: operators must cover basis indices up to 2M");
  require_diagonal(t_op, "hypothesis_slope: T");
  require_diagonal(c_op, "hypothesis_slope: C");
  const double root_m = std::sqrt(static_cast<double>(m));
  Vector f = Vector::Zero(t_op.dim());
  for (int k = 1; k <= m; ++k) {
    if (theta[static_cast<std::size_t>(k - 1)] == 0) continue;
    const Index j = static_cast<Index>(k + m - 1);  // basis index k+M, 0-based
    const double mu = t_op.matrix()(j, j);
    if (kind == FamilyKind::Commutative) {
      f(j) = std::pow(mu, smoothness) / root_m;
    } else {
      const double tau = mu * c_op.matrix()(j, j);
      f(j) = std::sqrt(mu) * std::pow(tau, smoothness) / root_m;
    }
  }
  return f;
}

HypothesisFamily build_hypothesis_family(Codebook codebook, double smoothness, FamilyKind kind,
                                         const SpectralOperator& t_op, const SpectralOperator& c_op) {
  HypothesisFamily family;
  family.kind = kind;
  family.smoothness = smoothness;
  family.slopes.reserve(codebook.words.size());
  for (const auto& word : codebook.words)
    family.slopes.push_back(
        hypothesis_slope(word, codebook.word_length, smoothness, kind, t_op, c_op));
  family.codebook = std::move(codebook);
  return family;
}

double kl_divergence(const Vector& f1, const Vector& f2, double n, double sigma2,
                     const SpectralOperator& c_op) {
  require(sigma2 > 0.0, "kl_divergence: sigma^2 must be positive");
  require(n > 0.0, "kl_divergence: n must be positive");
  require(f1.size() == f2.size() && f1.size() == c_op.dim(), "kl_divergence: size mismatch");
  const Vector delta = f1 - f2;
  return n / (2.0 * sigma2) * delta.dot(c_op.matrix() * delta);
}

nlohmann::json SeparationReport::to_json() const {
  nlohmann::json j;
  j["M"] = m;
  j["n_words"] = n_words;
  j["hamming_min"] = hamming_min;
  j["codebook_ok"] = codebook_ok;
  if (min_h.has_value()) {
    j["min_h"] = *min_h;
  } else {
    j["min_h"] = nullptr;
  }
  j["min_l2"] = min_l2;
  j["min_pred"] = min_pred;
  j["max_kl"] = max_kl;
  j["mean_kl"] = mean_kl;
  j["kl_budget"] = kl_budget;
  j["u"] = u;
  j["n_samples"] = n_samples;
  j["sigma2"] = sigma2;
  j["budget_ok"] = budget_ok;
  return j;
}

SeparationReport separation_report(const HypothesisFamily& family, const SpectralOperator& t_op,
                                   const SpectralOperator& c_op, double n, double sigma2, double u) {
  require(u > 0.0 && u < 0.125, "separation_report: u must lie in (0, 1/8)");
  require(sigma2 > 0.0, "separation_report: sigma^2 must be positive");
  require(family.slopes.size() == family.codebook.words.size() && family.slopes.size() >= 2,
          "separation_report: family must carry at least two hypotheses");

  SeparationReport report;
  report.m = family.codebook.word_length;
  report.n_words = family.codebook.n_hypotheses();
  report.codebook_ok = verify_codebook(family.codebook);
  report.u = u;
  report.n_samples = n;
  report.sigma2 = sigma2;

  int min_hamming = std::numeric_limits<int>::max();
  double min_h = std::numeric_limits<double>::infinity();
  bool h_defined = true;
  double min_l2 = std::numeric_limits<double>::infinity();
  double min_pred = std::numeric_limits<double>::infinity();
  const std::size_t count = family.slopes.size();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      min_hamming = std::min(min_hamming,
                             hamming_distance(family.codebook.words[i], family.codebook.words[j]));
      const Vector delta = family.slopes[i] - family.slopes[j];
      min_l2 = std::min(min_l2, l2_error(delta));
      min_pred = std::min(min_pred, std::sqrt(prediction_error(delta, c_op)));
      const auto h = rkhs_error(delta, t_op);
      if (h.has_value()) {
        min_h = std::min(min_h, *h);
      } else {
        h_defined = false;
      }
    }
  }
  report.hamming_min = min_hamming;
  if (h_defined) report.min_h = min_h;
  report.min_l2 = min_l2;
  report.min_pred = min_pred;

  double max_kl = 0.0;
  double sum_kl = 0.0;
  for (std::size_t j = 1; j < count; ++j) {
    const double kl = kl_divergence(family.slopes[j], family.slopes[0], n, sigma2, c_op);
    max_kl = std::max(max_kl, kl);
    sum_kl += kl;
  }
  report.max_kl = max_kl;
  report.mean_kl = sum_kl / static_cast<double>(report.n_words);
  report.kl_budget = u * std::log(static_cast<double>(report.n_words));
  report.budget_ok = report.mean_kl <= report.kl_budget;
  return report;
}

}  // namespace flr
