#include "flr/kernels.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flr {

double analytic_eigenvalue(AnalyticKind kind, int i, double power_exponent) {
  require(i >= 1, "analytic_eigenvalue: index starts at 1");
  const double a = (static_cast<double>(i) - 0.5) * kPi;
  switch (kind) {
    case AnalyticKind::BrownianCov: return 1.0 / (a * a);
    case AnalyticKind::CubicKernel: return 1.0 / (a * a * a * a);
    case AnalyticKind::SyntheticPower:
      require(power_exponent > 0.0, "analytic_eigenvalue: SyntheticPower needs a positive exponent");
      return std::pow(static_cast<double>(i), -power_exponent);
  }
  throw PreconditionError("unknown analytic kind");
}

double sine_eigenfunction(int i, double s) {
  require(i >= 1, "sine_eigenfunction: index starts at 1");
  return std::sqrt(2.0) * std::sin((static_cast<double>(i) - 0.5) * kPi * s);
}

namespace {
void check_unit_interval(double s, double t) {
  require(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0,
          "kernel arguments must lie in [0,1]");
}
}  // namespace

double eval_cubic_kernel(double s, double t) {
  check_unit_interval(s, t);
  const double d = std::abs(s - t);
  const double u = s + t;
  return d * d * d / 12.0 - u * u * u / 12.0 + s * t;
}

double eval_brownian_cov(double s, double t) {
  check_unit_interval(s, t);
  return std::min(s, t);
}

QuadratureGrid QuadratureGrid::UniformTrapezoid(int n) {
  require(n >= 2, "UniformTrapezoid: need at least 2 points");
  QuadratureGrid grid;
  grid.points.resize(static_cast<std::size_t>(n));
  grid.weights.resize(static_cast<std::size_t>(n));
  const double h = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    grid.points[static_cast<std::size_t>(i)] = static_cast<double>(i) * h;
    grid.weights[static_cast<std::size_t>(i)] = (i == 0 || i == n - 1) ? h / 2.0 : h;
  }
  grid.points.back() = 1.0;
  return grid;
}

void QuadratureGrid::validate() const {
  require(points.size() == weights.size() && !points.empty(),
          "QuadratureGrid: points/weights size mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(weights[i] > 0.0, "QuadratureGrid: weights must be positive");
    require(i == 0 || points[i] > points[i - 1], "QuadratureGrid: points must be strictly increasing");
  }
}

SpectralOperator nystrom_discretize(const std::function<double(double, double)>& kernel,
                                    const QuadratureGrid& grid) {
  grid.validate();
  const Index g = static_cast<Index>(grid.points.size());
  Matrix k(g, g);
  for (Index i = 0; i < g; ++i)
    for (Index j = 0; j < g; ++j)
      k(i, j) = kernel(grid.points[static_cast<std::size_t>(i)], grid.points[static_cast<std::size_t>(j)]);
  const double scale = std::max(k.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "nystrom_discretize: kernel asymmetry " << asym / scale << " exceeds 1e-10 relative";
    throw PreconditionError(msg.str());
  }
  Vector root_w(g);
  for (Index i = 0; i < g; ++i) root_w(i) = std::sqrt(grid.weights[static_cast<std::size_t>(i)]);
  Matrix sym = root_w.asDiagonal() * k * root_w.asDiagonal();
  return SpectralOperator(0.5 * (sym + sym.transpose()));
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim ascii whitespace
    std::size_t b = cell.find_first_not_of(" \t\r");
    std::size_t e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

double parse_double(const std::string& cell, int row, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (...) {
    std::ostringstream msg;
    msg << path << ": row " << row << ": non-numeric cell \"" << cell << "\"";
    throw ParseError(msg.str());
  }
}

}  // namespace

Matrix ingest_curves(const std::string& csv_path, const QuadratureGrid& grid, int m_basis) {
  grid.validate();
  require(m_basis >= 1, "ingest_curves: m_basis must be positive");
  std::ifstream in(csv_path);
  if (!in) throw ParseError(csv_path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(csv_path + ": empty file");
  const auto header = split_csv_row(line);
  const std::size_t g = grid.points.size();
  if (header.size() != g + 1) {
    std::ostringstream msg;
    msg << csv_path << ": row 1: header has " << header.size() - 1 << " grid points, expected " << g;
    throw ParseError(msg.str());
  }
  for (std::size_t i = 0; i < g; ++i) {
    const double p = parse_double(header[i + 1], 1, csv_path);
    if (std::abs(p - grid.points[i]) > 1e-9) {
      std::ostringstream msg;
      msg << csv_path << ": row 1: grid point " << i + 1 << " is " << p << ", expected "
          << grid.points[i];
      throw ParseError(msg.str());
    }
  }

  // Precompute the weighted eigenfunction table: proj(i) = sum_g w_g phi_i(s_g) x(s_g).
  Matrix basis(static_cast<Index>(g), m_basis);
  for (std::size_t gi = 0; gi < g; ++gi)
    for (int i = 0; i < m_basis; ++i)
      basis(static_cast<Index>(gi), i) = grid.weights[gi] * sine_eigenfunction(i + 1, grid.points[gi]);

  std::vector<Vector> rows;
  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != g + 1) {
      std::ostringstream msg;
      msg << csv_path << ": row " << row_number << ": has " << cells.size() - 1
          << " samples, expected " << g;
      throw ParseError(msg.str());
    }
    Vector samples(static_cast<Index>(g));
    for (std::size_t i = 0; i < g; ++i)
      samples(static_cast<Index>(i)) = parse_double(cells[i + 1], row_number, csv_path);
    rows.push_back(basis.transpose() * samples);
  }
  Matrix coeffs(static_cast<Index>(rows.size()), m_basis);
  for (std::size_t r = 0; r < rows.size(); ++r) coeffs.row(static_cast<Index>(r)) = rows[r];
  return coeffs;
}

}  // namespace flr
