#ifndef FLR_REPORT_HPP
#define FLR_REPORT_HPP

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flr/rates.hpp"

namespace flr {

inline constexpr const char* kToolVersion = "flr 0.1.0";

/// Provenance record written by every CLI command. Timestamps are the only
/// run-varying content; all numeric outputs are byte-stable.
struct RunManifest {
  std::string config_hash;
  std::uint64_t base_seed = 0;
  std::string tool_version = kToolVersion;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

std::string iso8601_utc_now();

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Self-contained log-log SVG: median points with quartile whiskers, the
/// fitted slope line and a theory-slope guide line.
std::string svg_rate_plot(const RateReport& report);

}  // namespace flr

#endif  // FLR_REPORT_HPP
