#include "flr/report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flr {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["base_seed"] = base_seed;
  j["tool_version"] = tool_version;
  j["started"] = started;
  j["finished"] = finished;
  j["outputs"] = outputs;
  return j;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << content;
  if (!out) throw ParseError(path + ": write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

}  // namespace

std::string svg_rate_plot(const RateReport& report) {
  const double width = 560.0, height = 420.0;
  const double left = 70.0, right = 20.0, top = 36.0, bottom = 56.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double min_x = std::numeric_limits<double>::infinity(), max_x = 0.0;
  double min_y = std::numeric_limits<double>::infinity(), max_y = 0.0;
  for (const auto& p : report.per_n) {
    min_x = std::min(min_x, static_cast<double>(p.n));
    max_x = std::max(max_x, static_cast<double>(p.n));
    min_y = std::min(min_y, p.q25 > 0.0 ? p.q25 : p.median);
    max_y = std::max(max_y, p.q75 > 0.0 ? p.q75 : p.median);
  }
  min_y = std::max(min_y, 1e-300);
  const double lx0 = std::log10(min_x), lx1 = std::log10(max_x);
  double ly0 = std::log10(min_y), ly1 = std::log10(max_y);
  const double pad = 0.08 * std::max(ly1 - ly0, 0.2);
  ly0 -= pad;
  ly1 += pad;
  auto sx = [&](double n) { return left + (std::log10(n) - lx0) / (lx1 - lx0) * plot_w; };
  auto sy = [&](double e) { return top + (ly1 - std::log10(e)) / (ly1 - ly0) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << report.setting << " / " << report.metric << " (slope " << fmt(report.fitted_slope, 4)
      << ", theory " << fmt(-report.theory_exponent, 4) << ", " << report.verdict << ")</text>\n";

  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  for (const auto& p : report.per_n) {
    const double x = sx(p.n);
    svg << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
        << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << p.n
        << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double y = top + (ly1 - e) / (ly1 - ly0) * plot_h;
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n</text>\n";
  svg << "<text x=\"16\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 "
         "16 "
      << top + plot_h / 2 << ")\">median error</text>\n";

  // fitted line through the log-log centroid
  double cx = 0.0, cy = 0.0;
  for (const auto& p : report.per_n) {
    cx += std::log10(static_cast<double>(p.n));
    cy += std::log10(p.median);
  }
  cx /= static_cast<double>(report.per_n.size());
  cy /= static_cast<double>(report.per_n.size());
  auto line_between = [&](double slope, const char* color, const char* dash) {
    const double yl = cy + slope * (lx0 - cx);
    const double yr = cy + slope * (lx1 - cx);
    svg << "<line x1=\"" << left << "\" y1=\"" << top + (ly1 - yl) / (ly1 - ly0) * plot_h
        << "\" x2=\"" << left + plot_w << "\" y2=\"" << top + (ly1 - yr) / (ly1 - ly0) * plot_h
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash << "/>\n";
  };
  line_between(report.fitted_slope, "#1f77b4", "");
  line_between(-report.theory_exponent, "#d62728", " stroke-dasharray=\"6 4\"");

  // quartile whiskers and median points
  for (const auto& p : report.per_n) {
    const double x = sx(p.n);
    if (p.q25 > 0.0 && p.q75 > 0.0)
      svg << "<line x1=\"" << x << "\" y1=\"" << sy(p.q25) << "\" x2=\"" << x << "\" y2=\""
          << sy(p.q75) << "\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
    svg << "<circle cx=\"" << x << "\" cy=\"" << sy(p.median)
        << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
  }
  svg << "<text x=\"" << left + plot_w - 4 << "\" y=\"" << top + 14
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">theory "
         "slope "
      << fmt(-report.theory_exponent, 4) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace flr
