#ifndef FLR_CONFIG_HPP
#define FLR_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flr/lower_bounds.hpp"
#include "flr/rates.hpp"
#include "flr/simulate.hpp"

namespace flr {

/// All validation violations, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Section -> key -> raw value. std::map keeps both levels sorted, which is
/// what makes the serialized form canonical.
using ConfigDoc = std::map<std::string, std::map<std::string, std::string>>;

struct FiltersCheckParams {
  std::vector<double> p_list{1.0, 2.0, 4.0};
  double eta = 1.0;
  int sigma_grid = 512;
  int lambda_grid = 16;
  // When false, each family is only asked to certify p within its
  // qualification; when true, every p in p_list is attempted everywhere.
  bool include_beyond_qualification = false;
};

struct LowerBoundConfig {
  int m = 16;
  double u = 0.1;
  double sigma2 = 1.0;
  double n = 1000.0;
  double smoothness = 0.5;
  FamilyKind kind = FamilyKind::Commutative;
  double t = 4.0;
  double c = 2.0;
};

struct SimulateParams {
  int n = 256;
};

struct FitParams {
  double lambda = 0.1;
  std::string dataset;    // dataset CSV path
  std::string truth;      // optional truth sidecar path
  std::string curves;     // alternative input: curves CSV to be projected
  std::string responses;  // y values for curves input, one per line
  int grid_points = 256;
};

struct OutputParams {
  std::string dir = "out";
};

struct HarnessConfig {
  std::string mode = "rates";  // or "saturation"
  HarnessParams params;
  int saturation_n = 8192;
};

struct AppConfig {
  Scenario scenario;
  HarnessConfig harness;
  LowerBoundConfig lowerbound;
  FiltersCheckParams filters;
  SimulateParams simulate;
  FitParams fit;
  OutputParams output;
  std::vector<std::string> warnings;  // soft-floor advisories, not errors
};

/// key = value lines under [section] headers; '#' starts a comment.
ConfigDoc parse_config_text(const std::string& text);

/// Validates every provided key against the schema and the assumptions'
/// ranges; throws ValidationError carrying the full list of violations.
AppConfig config_from_doc(const ConfigDoc& doc);

/// Canonical, fully explicit document for an AppConfig.
ConfigDoc doc_from_config(const AppConfig& config);

std::string serialize_config(const ConfigDoc& doc);

nlohmann::json canonical_json(const AppConfig& config);

/// FNV-1a 64-bit hex digest of the canonical JSON text.
std::string config_hash_hex(const AppConfig& config);

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

}  // namespace flr

#endif  // FLR_CONFIG_HPP
