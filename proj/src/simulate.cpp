#include "flr/simulate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flr/kernels.hpp"
#include "flr/rates.hpp"

namespace flr {

std::string to_string(ScenarioMode mode) {
  return mode == ScenarioMode::Commutative ? "commutative" : "noncommutative";
}

std::string to_string(CommBasis basis) {
  return basis == CommBasis::BrownianCubic ? "brownian-cubic" : "power";
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["basis"] = to_string(basis);
  j["M"] = dim;
  j["t"] = t;
  j["c"] = c;
  j["alpha"] = alpha;
  j["s"] = s;
  j["sigma"] = sigma;
  j["filter"] = to_string(filter);
  j["seed"] = seed;
  j["h_decay"] = h_decay;
  j["mixing_seed"] = mixing_seed;
  return j;
}

Matrix sample_covariates(const SpectralOperator& c_op, int n, RngStream& rng) {
  require(n >= 1, "sample_covariates: need n >= 1");
  if (c_op.min_eigenvalue() < 0.0) throw PreconditionError("sample_covariates: C is not PSD");
  const Index m = c_op.dim();
  Matrix z(n, m);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < m; ++i) z(k, i) = rng.normal();
  Vector root(m);
  for (Index i = 0; i < m; ++i) root(i) = std::sqrt(std::max(c_op.eigenvalues()(i), 0.0));
  // x_k = U diag(root) z_k, i.e. X = Z diag(root) U^T.
  return z * root.asDiagonal() * c_op.eigenvectors().transpose();
}

Vector make_slope_commutative(double alpha, const Vector& mu, const Vector& h) {
  require(alpha > 0.0, "make_slope_commutative: alpha must be positive");
  require(mu.size() == h.size(), "make_slope_commutative: size mismatch");
  Vector beta(mu.size());
  for (Index i = 0; i < mu.size(); ++i)
    beta(i) = (mu(i) > 0.0 ? std::pow(mu(i), alpha) : 0.0) * h(i);
  return beta;
}

Vector make_slope_noncommutative(double s, const SpectralOperator& t_op,
                                 const SpectralOperator& lambda_op, const Vector& h) {
  require(s > 0.0, "make_slope_noncommutative: s must be positive");
  require(t_op.dim() == lambda_op.dim() && h.size() == t_op.dim(),
          "make_slope_noncommutative: size mismatch");
  const SpectralOperator t_half = frac_power(t_op, 0.5);
  const SpectralOperator lam_s = frac_power(lambda_op, s);
  return t_half.matrix() * (lam_s.matrix() * h);
}

Vector default_h(int m, double decay) {
  require(m >= 1, "default_h: m must be positive");
  Vector h(m);
  for (Index i = 0; i < m; ++i) h(i) = std::pow(static_cast<double>(i + 1), -decay);
  return h / h.norm();
}

OperatorPair make_noncommutative_pair(int m, double t, double c, std::uint64_t mixing_seed) {
  require(m >= 8, "make_noncommutative_pair: M must be at least 8");
  require(t > 1.0 && c > 1.0, "make_noncommutative_pair: decay exponents must exceed 1");
  Vector mu(m), xi(m);
  for (Index i = 0; i < m; ++i) {
    mu(i) = std::pow(static_cast<double>(i + 1), -t);
    xi(i) = std::pow(static_cast<double>(i + 1), -c);
  }
  Matrix q = Matrix::Identity(m, m);
  if (mixing_seed != 0) {
    RngStream rng = derive_stream(mixing_seed, {0x6D6978ULL});  // "mix"
    for (int r = 0; r < 3 * m; ++r) {
      const Index a = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(m - 1)));
      const double angle = (2.0 * rng.uniform01() - 1.0) * 0.3;
      Eigen::JacobiRotation<double> rot(std::cos(angle), std::sin(angle));
      q.applyOnTheLeft(a, a + 1, rot);
    }
    const double orth = (q.transpose() * q - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (orth > 1e-10) {
      std::ostringstream msg;
      msg << "make_noncommutative_pair: mixing matrix orthogonality deviation " << orth;
      throw NumericError(msg.str());
    }
  }
  OperatorPair pair{SpectralOperator::FromDiagonal(mu),
                    SpectralOperator(q * xi.asDiagonal() * q.transpose(), 1e-10),
                    SpectralOperator::Zero(m), 0.0};
  pair.lambda_op = sandwich(pair.t_op, pair.c_op);
  std::vector<std::pair<double, double>> decay;
  for (Index i = 1; i < m / 2; ++i)
    decay.emplace_back(static_cast<double>(i + 1), pair.lambda_op.eigenvalues()(i));
  pair.fitted_b = -fit_loglog_slope(decay).slope;
  return pair;
}

ScenarioModel build_model(const Scenario& scenario) {
  require(scenario.dim >= 8, "Scenario: M must be at least 8");
  require(scenario.sigma >= 0.0, "Scenario: sigma must be nonnegative");
  const int m = scenario.dim;
  if (scenario.mode == ScenarioMode::Commutative) {
    require(scenario.t > 1.0 && scenario.c > 1.0, "Scenario: decay exponents must exceed 1");
    Vector mu(m), xi(m);
    for (int i = 1; i <= m; ++i) {
      if (scenario.basis == CommBasis::BrownianCubic) {
        mu(i - 1) = analytic_eigenvalue(AnalyticKind::CubicKernel, i);
        xi(i - 1) = analytic_eigenvalue(AnalyticKind::BrownianCov, i);
      } else {
        mu(i - 1) = analytic_eigenvalue(AnalyticKind::SyntheticPower, i, scenario.t);
        xi(i - 1) = analytic_eigenvalue(AnalyticKind::SyntheticPower, i, scenario.c);
      }
    }
    ScenarioModel model{SpectralOperator::FromDiagonal(mu), SpectralOperator::FromDiagonal(xi),
                        SpectralOperator::FromDiagonal(mu.cwiseProduct(xi)), Vector(),
                        scenario.t + scenario.c};
    model.beta_star = make_slope_commutative(scenario.alpha, mu, default_h(m, scenario.h_decay));
    return model;
  }
  OperatorPair pair = make_noncommutative_pair(m, scenario.t, scenario.c, scenario.mixing_seed);
  ScenarioModel model{std::move(pair.t_op), std::move(pair.c_op), std::move(pair.lambda_op),
                      Vector(), pair.fitted_b};
  model.beta_star =
      make_slope_noncommutative(scenario.s, model.t_op, model.lambda_op, default_h(m, scenario.h_decay));
  return model;
}

Dataset gen_dataset(const ScenarioModel& model, double sigma, int n, RngStream& rng) {
  require(n >= 2, "gen_dataset: need n >= 2");
  require(sigma >= 0.0, "gen_dataset: sigma must be nonnegative");
  Dataset data;
  data.x_coeffs = sample_covariates(model.c_op, n, rng);
  data.y = data.x_coeffs * model.beta_star;
  if (sigma > 0.0) {
    for (Index k = 0; k < n; ++k) data.y(k) += sigma * rng.normal();
  }
  data.truth = std::make_shared<DatasetTruth>(
      DatasetTruth{model.beta_star, model.t_op, model.c_op, model.lambda_op, model.fitted_b});
  return data;
}

Dataset gen_dataset(const Scenario& scenario, int n, RngStream& rng) {
  return gen_dataset(build_model(scenario), scenario.sigma, n, rng);
}

namespace {
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}
}  // namespace

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open for writing");
  const Index n = dataset.x_coeffs.rows();
  const Index m = dataset.x_coeffs.cols();
  for (Index i = 0; i < m; ++i) out << "x_" << (i + 1) << ",";
  out << "y\n";
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < m; ++i) out << format_double(dataset.x_coeffs(k, i)) << ",";
    out << format_double(dataset.y(k)) << "\n";
  }
}

nlohmann::json truth_to_json(const DatasetTruth& truth) {
  nlohmann::json j;
  j["beta_star"] = std::vector<double>(truth.beta_star.data(),
                                       truth.beta_star.data() + truth.beta_star.size());
  j["T"] = truth.t_op.to_json();
  j["C"] = truth.c_op.to_json();
  j["Lambda"] = truth.lambda_op.to_json();
  j["fitted_b"] = truth.fitted_b;
  return j;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (columns < 2) throw ParseError(path + ": row 1: expected x_1..x_M,y header");
  const std::size_t m = columns - 1;
  std::vector<std::vector<double>> rows;
  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    row.reserve(columns);
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        std::ostringstream msg;
        msg << path << ": row " << row_number << ": non-numeric cell \"" << cell << "\"";
        throw ParseError(msg.str());
      }
    }
    if (row.size() != columns) {
      std::ostringstream msg;
      msg << path << ": row " << row_number << ": has " << row.size() << " cells, expected " << columns;
      throw ParseError(msg.str());
    }
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.x_coeffs.resize(static_cast<Index>(rows.size()), static_cast<Index>(m));
  data.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < m; ++i) data.x_coeffs(static_cast<Index>(k), static_cast<Index>(i)) = rows[k][i];
    data.y(static_cast<Index>(k)) = rows[k][m];
  }
  return data;
}

}  // namespace flr
