#include "flr/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flr {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream out;
  out << "config validation failed (" << issues.size() << " issue"
      << (issues.size() == 1 ? "" : "s") << "):";
  for (const auto& issue : issues) out << "\n  - " << issue;
  return out.str();
}

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ConfigDoc parse_config_text(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        std::ostringstream msg;
        msg << "config line " << line_number << ": malformed section header \"" << line << "\"";
        throw ParseError(msg.str());
      }
      section = trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      std::ostringstream msg;
      msg << "config line " << line_number << ": expected key = value inside a [section], got \""
          << line << "\"";
      throw ParseError(msg.str());
    }
    doc[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return doc;
}

namespace {

/// Collects typed lookups and range violations for one validation pass.
class Checker {
 public:
  explicit Checker(const ConfigDoc& doc) : doc_(doc) {}

  bool has(const std::string& section, const std::string& key) const {
    const auto sec = doc_.find(section);
    return sec != doc_.end() && sec->second.count(key) > 0;
  }

  std::string raw(const std::string& section, const std::string& key) const {
    return doc_.at(section).at(key);
  }

  void mark_known(const std::string& section, const std::string& key) {
    known_[section].insert(key);
  }

  template <typename Fn>
  void fetch(const std::string& section, const std::string& key, Fn&& parse_assign) {
    mark_known(section, key);
    if (!has(section, key)) return;
    try {
      parse_assign(raw(section, key));
    } catch (const std::exception& e) {
      issue(section + "." + key + ": " + e.what());
    }
  }

  void issue(const std::string& what) { issues_.push_back(what); }

  void check_unknown_keys() {
    for (const auto& [section, kv] : doc_) {
      const auto known_section = known_.find(section);
      if (known_section == known_.end()) {
        issue("unknown section [" + section + "]");
        continue;
      }
      for (const auto& [key, value] : kv) {
        (void)value;
        if (!known_section->second.count(key))
          issue("unknown key " + section + "." + key);
      }
    }
  }

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  const ConfigDoc& doc_;
  std::vector<std::string> issues_;
  std::map<std::string, std::set<std::string>> known_;
};

double parse_real(const std::string& raw) {
  std::size_t used = 0;
  const double v = std::stod(raw, &used);
  if (used != raw.size()) throw std::invalid_argument("not a number: \"" + raw + "\"");
  return v;
}

long long parse_int(const std::string& raw) {
  std::size_t used = 0;
  const long long v = std::stoll(raw, &used);
  if (used != raw.size()) throw std::invalid_argument("not an integer: \"" + raw + "\"");
  return v;
}

std::uint64_t parse_u64(const std::string& raw) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(raw, &used);
  if (used != raw.size()) throw std::invalid_argument("not an unsigned integer: \"" + raw + "\"");
  return v;
}

bool parse_bool(const std::string& raw) {
  if (raw == "true" || raw == "1") return true;
  if (raw == "false" || raw == "0") return false;
  throw std::invalid_argument("not a boolean: \"" + raw + "\"");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  std::istringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

}  // namespace

AppConfig config_from_doc(const ConfigDoc& doc) {
  AppConfig cfg;
  Checker check(doc);

  // [scenario]
  check.fetch("scenario", "mode", [&](const std::string& v) {
    if (v == "commutative") cfg.scenario.mode = ScenarioMode::Commutative;
    else if (v == "noncommutative") cfg.scenario.mode = ScenarioMode::NonCommutative;
    else throw std::invalid_argument("expected commutative or noncommutative");
  });
  check.fetch("scenario", "basis", [&](const std::string& v) {
    if (v == "brownian-cubic") cfg.scenario.basis = CommBasis::BrownianCubic;
    else if (v == "power") cfg.scenario.basis = CommBasis::SyntheticPower;
    else throw std::invalid_argument("expected brownian-cubic or power");
  });
  // the default truncation is mode dependent: 256 commutative, 128 non-commutative
  if (!check.has("scenario", "M") && cfg.scenario.mode == ScenarioMode::NonCommutative)
    cfg.scenario.dim = 128;
  check.fetch("scenario", "M", [&](const std::string& v) { cfg.scenario.dim = static_cast<int>(parse_int(v)); });
  check.fetch("scenario", "t", [&](const std::string& v) { cfg.scenario.t = parse_real(v); });
  check.fetch("scenario", "c", [&](const std::string& v) { cfg.scenario.c = parse_real(v); });
  check.fetch("scenario", "alpha", [&](const std::string& v) { cfg.scenario.alpha = parse_real(v); });
  check.fetch("scenario", "s", [&](const std::string& v) { cfg.scenario.s = parse_real(v); });
  check.fetch("scenario", "sigma", [&](const std::string& v) { cfg.scenario.sigma = parse_real(v); });
  check.fetch("scenario", "filter", [&](const std::string& v) { cfg.scenario.filter = filter_from_string(v); });
  check.fetch("scenario", "seed", [&](const std::string& v) { cfg.scenario.seed = parse_u64(v); });
  check.fetch("scenario", "h_decay", [&](const std::string& v) { cfg.scenario.h_decay = parse_real(v); });
  check.fetch("scenario", "mixing_seed", [&](const std::string& v) { cfg.scenario.mixing_seed = parse_u64(v); });

  if (cfg.scenario.dim < 8) check.issue("scenario.M: must be at least 8");
  if (!(cfg.scenario.t > 1.0))
    check.issue("scenario.t: decay exponent must exceed 1 (eigenvalue decay assumption)");
  if (!(cfg.scenario.c > 1.0))
    check.issue("scenario.c: decay exponent must exceed 1 (eigenvalue decay assumption)");
  if (!(cfg.scenario.alpha > 0.0)) check.issue("scenario.alpha: source exponent must be positive");
  if (!(cfg.scenario.s > 0.0)) check.issue("scenario.s: source exponent must be positive");
  if (!(cfg.scenario.sigma >= 0.0)) check.issue("scenario.sigma: noise level must be nonnegative");
  if (!(cfg.scenario.h_decay > 0.5))
    check.issue("scenario.h_decay: must exceed 0.5 so h stays square-summable");
  if (cfg.scenario.mode == ScenarioMode::Commutative &&
      cfg.scenario.basis == CommBasis::BrownianCubic &&
      (cfg.scenario.t != 4.0 || cfg.scenario.c != 2.0)) {
    check.issue("scenario: the brownian-cubic basis has decays t=4, c=2; use basis=power for other decays");
  }

  // [harness]
  check.fetch("harness", "mode", [&](const std::string& v) {
    if (v != "rates" && v != "saturation") throw std::invalid_argument("expected rates or saturation");
    cfg.harness.mode = v;
  });
  check.fetch("harness", "n_grid", [&](const std::string& v) {
    std::vector<int> grid;
    for (const auto& item : split_list(v)) grid.push_back(static_cast<int>(parse_int(item)));
    cfg.harness.params.n_grid = std::move(grid);
  });
  check.fetch("harness", "replicates", [&](const std::string& v) {
    cfg.harness.params.replicates = static_cast<int>(parse_int(v));
  });
  check.fetch("harness", "lambda_rule", [&](const std::string& v) {
    if (v != "theorem" && v != "oracle") throw std::invalid_argument("expected theorem or oracle");
    cfg.harness.params.lambda_rule = v;
  });
  check.fetch("harness", "metrics", [&](const std::string& v) {
    std::vector<std::string> metrics = split_list(v);
    for (const auto& metric : metrics)
      if (metric != "l2" && metric != "rkhs" && metric != "pred")
        throw std::invalid_argument("metrics must be among l2, rkhs, pred");
    cfg.harness.params.metrics = std::move(metrics);
  });
  check.fetch("harness", "tol_estimation", [&](const std::string& v) {
    cfg.harness.params.tol_estimation = parse_real(v);
  });
  check.fetch("harness", "tol_prediction", [&](const std::string& v) {
    cfg.harness.params.tol_prediction = parse_real(v);
  });
  check.fetch("harness", "saturation_n", [&](const std::string& v) {
    cfg.harness.saturation_n = static_cast<int>(parse_int(v));
  });

  if (cfg.harness.mode == "rates") {
    if (cfg.harness.params.n_grid.size() < 4)
      check.issue("harness.n_grid: need at least 4 points for a slope fit");
    for (std::size_t i = 1; i < cfg.harness.params.n_grid.size(); ++i)
      if (cfg.harness.params.n_grid[i] <= cfg.harness.params.n_grid[i - 1]) {
        check.issue("harness.n_grid: must be strictly increasing");
        break;
      }
    for (int n : cfg.harness.params.n_grid) {
      if (n < 4 * std::sqrt(static_cast<double>(cfg.scenario.dim)))
        cfg.warnings.push_back("harness.n_grid: n=" + std::to_string(n) +
                               " is below the soft floor 4*sqrt(M); results may be pre-asymptotic");
      break;  // only flag the smallest n
    }
  }
  if (cfg.harness.params.replicates < 1) check.issue("harness.replicates: must be positive");
  if (!(cfg.harness.params.tol_estimation > 0.0)) check.issue("harness.tol_estimation: must be positive");
  if (!(cfg.harness.params.tol_prediction > 0.0)) check.issue("harness.tol_prediction: must be positive");
  if (cfg.scenario.mode == ScenarioMode::NonCommutative)
    for (const auto& metric : cfg.harness.params.metrics)
      if (metric == "l2")
        check.issue("harness.metrics: no theorem covers l2 in the non-commutative setting");
  if (cfg.scenario.mode == ScenarioMode::Commutative && cfg.scenario.alpha < 0.5)
    for (const auto& metric : cfg.harness.params.metrics)
      if (metric == "rkhs")
        check.issue("harness.metrics: the RKHS rate requires alpha >= 1/2");

  // [lowerbound]
  check.fetch("lowerbound", "M", [&](const std::string& v) { cfg.lowerbound.m = static_cast<int>(parse_int(v)); });
  check.fetch("lowerbound", "u", [&](const std::string& v) { cfg.lowerbound.u = parse_real(v); });
  check.fetch("lowerbound", "sigma2", [&](const std::string& v) { cfg.lowerbound.sigma2 = parse_real(v); });
  check.fetch("lowerbound", "n", [&](const std::string& v) { cfg.lowerbound.n = parse_real(v); });
  check.fetch("lowerbound", "smoothness", [&](const std::string& v) { cfg.lowerbound.smoothness = parse_real(v); });
  check.fetch("lowerbound", "kind", [&](const std::string& v) {
    if (v == "commutative") cfg.lowerbound.kind = FamilyKind::Commutative;
    else if (v == "noncommutative") cfg.lowerbound.kind = FamilyKind::NonCommutative;
    else throw std::invalid_argument("expected commutative or noncommutative");
  });
  check.fetch("lowerbound", "t", [&](const std::string& v) { cfg.lowerbound.t = parse_real(v); });
  check.fetch("lowerbound", "c", [&](const std::string& v) { cfg.lowerbound.c = parse_real(v); });

  if (cfg.lowerbound.m < 8) check.issue("lowerbound.M: must be at least 8");
  if (!(cfg.lowerbound.u > 0.0 && cfg.lowerbound.u < 0.125))
    check.issue("lowerbound.u: must lie in (0, 1/8)");
  if (!(cfg.lowerbound.sigma2 > 0.0))
    check.issue("lowerbound.sigma2: must be positive (the KL formula needs Gaussian noise)");
  if (!(cfg.lowerbound.n > 0.0)) check.issue("lowerbound.n: must be positive");
  if (!(cfg.lowerbound.smoothness > 0.0)) check.issue("lowerbound.smoothness: must be positive");
  if (!(cfg.lowerbound.t > 1.0)) check.issue("lowerbound.t: decay exponent must exceed 1");
  if (!(cfg.lowerbound.c > 1.0)) check.issue("lowerbound.c: decay exponent must exceed 1");

  // [filters]
  check.fetch("filters", "p_list", [&](const std::string& v) {
    std::vector<double> ps;
    for (const auto& item : split_list(v)) ps.push_back(parse_real(item));
    cfg.filters.p_list = std::move(ps);
  });
  check.fetch("filters", "eta", [&](const std::string& v) { cfg.filters.eta = parse_real(v); });
  check.fetch("filters", "sigma_grid", [&](const std::string& v) {
    cfg.filters.sigma_grid = static_cast<int>(parse_int(v));
  });
  check.fetch("filters", "lambda_grid", [&](const std::string& v) {
    cfg.filters.lambda_grid = static_cast<int>(parse_int(v));
  });
  check.fetch("filters", "include_beyond_qualification", [&](const std::string& v) {
    cfg.filters.include_beyond_qualification = parse_bool(v);
  });
  for (double p : cfg.filters.p_list)
    if (!(p > 0.0)) check.issue("filters.p_list: entries must be positive");
  if (!(cfg.filters.eta > 0.0)) check.issue("filters.eta: must be positive");
  if (cfg.filters.sigma_grid < 8) check.issue("filters.sigma_grid: too small");
  if (cfg.filters.lambda_grid < 4) check.issue("filters.lambda_grid: too small");

  // [simulate]
  check.fetch("simulate", "n", [&](const std::string& v) { cfg.simulate.n = static_cast<int>(parse_int(v)); });
  if (cfg.simulate.n < 2) check.issue("simulate.n: need at least 2 samples");

  // [fit]
  check.fetch("fit", "lambda", [&](const std::string& v) { cfg.fit.lambda = parse_real(v); });
  check.fetch("fit", "dataset", [&](const std::string& v) { cfg.fit.dataset = v; });
  check.fetch("fit", "truth", [&](const std::string& v) { cfg.fit.truth = v; });
  check.fetch("fit", "curves", [&](const std::string& v) { cfg.fit.curves = v; });
  check.fetch("fit", "responses", [&](const std::string& v) { cfg.fit.responses = v; });
  check.fetch("fit", "grid_points", [&](const std::string& v) {
    cfg.fit.grid_points = static_cast<int>(parse_int(v));
  });
  if (!(cfg.fit.lambda > 0.0)) check.issue("fit.lambda: must be positive");
  if (cfg.fit.grid_points < 2) check.issue("fit.grid_points: need at least 2");
  if (!cfg.fit.dataset.empty() && !cfg.fit.curves.empty())
    check.issue("fit: dataset and curves are mutually exclusive inputs");
  if (!cfg.fit.curves.empty() && cfg.fit.responses.empty())
    check.issue("fit: curves input needs a responses file (fit.responses)");

  // [output]
  check.fetch("output", "dir", [&](const std::string& v) { cfg.output.dir = v; });

  check.check_unknown_keys();
  if (!check.issues().empty()) throw ValidationError(check.issues());
  return cfg;
}

ConfigDoc doc_from_config(const AppConfig& cfg) {
  ConfigDoc doc;
  auto& scenario = doc["scenario"];
  scenario["mode"] = to_string(cfg.scenario.mode);
  scenario["basis"] = to_string(cfg.scenario.basis);
  scenario["M"] = std::to_string(cfg.scenario.dim);
  scenario["t"] = format_double(cfg.scenario.t);
  scenario["c"] = format_double(cfg.scenario.c);
  scenario["alpha"] = format_double(cfg.scenario.alpha);
  scenario["s"] = format_double(cfg.scenario.s);
  scenario["sigma"] = format_double(cfg.scenario.sigma);
  scenario["filter"] = to_string(cfg.scenario.filter);
  scenario["seed"] = std::to_string(cfg.scenario.seed);
  scenario["h_decay"] = format_double(cfg.scenario.h_decay);
  scenario["mixing_seed"] = std::to_string(cfg.scenario.mixing_seed);

  auto& harness = doc["harness"];
  harness["mode"] = cfg.harness.mode;
  {
    std::ostringstream grid;
    for (std::size_t i = 0; i < cfg.harness.params.n_grid.size(); ++i)
      grid << (i ? "," : "") << cfg.harness.params.n_grid[i];
    harness["n_grid"] = grid.str();
  }
  harness["replicates"] = std::to_string(cfg.harness.params.replicates);
  harness["lambda_rule"] = cfg.harness.params.lambda_rule;
  if (!cfg.harness.params.metrics.empty()) {
    std::ostringstream metrics;
    for (std::size_t i = 0; i < cfg.harness.params.metrics.size(); ++i)
      metrics << (i ? "," : "") << cfg.harness.params.metrics[i];
    harness["metrics"] = metrics.str();
  }
  harness["tol_estimation"] = format_double(cfg.harness.params.tol_estimation);
  harness["tol_prediction"] = format_double(cfg.harness.params.tol_prediction);
  harness["saturation_n"] = std::to_string(cfg.harness.saturation_n);

  auto& lower = doc["lowerbound"];
  lower["M"] = std::to_string(cfg.lowerbound.m);
  lower["u"] = format_double(cfg.lowerbound.u);
  lower["sigma2"] = format_double(cfg.lowerbound.sigma2);
  lower["n"] = format_double(cfg.lowerbound.n);
  lower["smoothness"] = format_double(cfg.lowerbound.smoothness);
  lower["kind"] = cfg.lowerbound.kind == FamilyKind::Commutative ? "commutative" : "noncommutative";
  lower["t"] = format_double(cfg.lowerbound.t);
  lower["c"] = format_double(cfg.lowerbound.c);

  auto& filters = doc["filters"];
  {
    std::ostringstream ps;
    for (std::size_t i = 0; i < cfg.filters.p_list.size(); ++i)
      ps << (i ? "," : "") << format_double(cfg.filters.p_list[i]);
    filters["p_list"] = ps.str();
  }
  filters["eta"] = format_double(cfg.filters.eta);
  filters["sigma_grid"] = std::to_string(cfg.filters.sigma_grid);
  filters["lambda_grid"] = std::to_string(cfg.filters.lambda_grid);
  filters["include_beyond_qualification"] =
      cfg.filters.include_beyond_qualification ? "true" : "false";

  doc["simulate"]["n"] = std::to_string(cfg.simulate.n);

  auto& fit = doc["fit"];
  fit["lambda"] = format_double(cfg.fit.lambda);
  if (!cfg.fit.dataset.empty()) fit["dataset"] = cfg.fit.dataset;
  if (!cfg.fit.truth.empty()) fit["truth"] = cfg.fit.truth;
  if (!cfg.fit.curves.empty()) fit["curves"] = cfg.fit.curves;
  if (!cfg.fit.responses.empty()) fit["responses"] = cfg.fit.responses;
  fit["grid_points"] = std::to_string(cfg.fit.grid_points);

  doc["output"]["dir"] = cfg.output.dir;
  return doc;
}

std::string serialize_config(const ConfigDoc& doc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, kv] : doc) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
  }
  return out.str();
}

nlohmann::json canonical_json(const AppConfig& cfg) {
  const ConfigDoc doc = doc_from_config(cfg);
  nlohmann::json j;
  for (const auto& [section, kv] : doc) {
    nlohmann::json sec;
    for (const auto& [key, value] : kv) sec[key] = value;
    j[section] = sec;
  }
  return j;
}

std::string config_hash_hex(const AppConfig& cfg) {
  const std::string text = canonical_json(cfg).dump();
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::vector<std::string> preset_names() {
  return {"comm-brownian-cubic-a05", "comm-saturation-a3", "noncomm-s1", "lowerbound-m16"};
}

std::string preset_text(const std::string& name) {
  if (name == "comm-brownian-cubic-a05") {
    return R"([scenario]
mode = commutative
basis = brownian-cubic
M = 256
t = 4
c = 2
alpha = 0.5
sigma = 0.5
filter = tikhonov
seed = 20260809
h_decay = 0.55

[harness]
mode = rates
n_grid = 128,256,512,1024,2048,4096,8192
replicates = 50
lambda_rule = theorem
metrics = l2,rkhs,pred
tol_estimation = 0.08
tol_prediction = 0.12

[output]
dir = out
)";
  }
  if (name == "comm-saturation-a3") {
    return R"([scenario]
mode = commutative
basis = brownian-cubic
M = 256
t = 4
c = 2
alpha = 3
sigma = 0.001
filter = tikhonov
seed = 20260811
h_decay = 0.55

[harness]
mode = saturation
saturation_n = 8192
replicates = 50

[output]
dir = out
)";
  }
  if (name == "noncomm-s1") {
    return R"([scenario]
mode = noncommutative
M = 128
t = 4
c = 2
s = 1
sigma = 0.1
filter = tikhonov
seed = 20260810
h_decay = 0.55
mixing_seed = 11

[harness]
mode = rates
n_grid = 128,256,512,1024,2048,4096,8192
replicates = 50
lambda_rule = theorem
metrics = rkhs,pred
tol_estimation = 0.10
tol_prediction = 0.12

[output]
dir = out
)";
  }
  if (name == "lowerbound-m16") {
    return R"([scenario]
seed = 20260812

[lowerbound]
M = 16
u = 0.1
sigma2 = 1
n = 1000
smoothness = 0.5
kind = commutative
t = 4
c = 2

[output]
dir = out
)";
  }
  throw ParseError("unknown preset: \"" + name + "\" (available: comm-brownian-cubic-a05, "
                   "comm-saturation-a3, noncomm-s1, lowerbound-m16)");
}

}  // namespace flr
