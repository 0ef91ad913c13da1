#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "flr/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exercises the built binary; skipped when FLR_CLI is not set (ctest sets it).
const char* cli_path() { return std::getenv("FLR_CLI"); }

int run(const std::string& args) {
  const std::string command = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "flr_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate then fit recovers exactly when noiseless" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("roundtrip");
  const fs::path sim_cfg = dir / "sim.cfg";
  flr::write_text_file(sim_cfg.string(),
                       "[scenario]\nM = 8\nsigma = 0\nseed = 21\nfilter = cutoff\n\n"
                       "[simulate]\nn = 32\n");
  REQUIRE(run("simulate --config " + sim_cfg.string() + " --out " + (dir / "sim").string()) == 0);

  const fs::path fit_cfg = dir / "fit.cfg";
  flr::write_text_file(fit_cfg.string(),
                       "[scenario]\nM = 8\nfilter = cutoff\n\n[fit]\nlambda = 1e-11\ndataset = " +
                           (dir / "sim" / "dataset.csv").string() + "\ntruth = " +
                           (dir / "sim" / "truth.json").string() + "\n");
  REQUIRE(run("fit --config " + fit_cfg.string() + " --out " + (dir / "fit").string()) == 0);
  const json fit = json::parse(flr::read_text_file((dir / "fit" / "fit.json").string()));
  CHECK(fit.at("errors").at("l2").get<double>() <= 1e-8);
}

TEST_CASE("fit without truth marks errors unavailable" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("no_truth");
  flr::write_text_file((dir / "sim.cfg").string(),
                       "[scenario]\nM = 8\nseed = 22\n\n[simulate]\nn = 16\n");
  REQUIRE(run("simulate --config " + (dir / "sim.cfg").string() + " --out " + (dir / "sim").string()) == 0);
  flr::write_text_file((dir / "fit.cfg").string(),
                       "[scenario]\nM = 8\n\n[fit]\nlambda = 0.01\ndataset = " +
                           (dir / "sim" / "dataset.csv").string() + "\n");
  REQUIRE(run("fit --config " + (dir / "fit.cfg").string() + " --out " + (dir / "fit").string()) == 0);
  const json fit = json::parse(flr::read_text_file((dir / "fit" / "fit.json").string()));
  CHECK(fit.at("errors") == "unavailable");
}

TEST_CASE("filters-check exit codes" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("filters");
  // default: p beyond a family's qualification is skipped -> exit 0
  flr::write_text_file((dir / "ok.cfg").string(), "[filters]\np_list = 1,2,4\n");
  CHECK(run("filters-check --config " + (dir / "ok.cfg").string() + " --out " +
            (dir / "ok").string()) == 0);
  // forcing Tikhonov p=2 fails certification -> exit 2
  flr::write_text_file((dir / "force.cfg").string(),
                       "[filters]\np_list = 1,2\ninclude_beyond_qualification = true\n");
  CHECK(run("filters-check --config " + (dir / "force.cfg").string() + " --out " +
            (dir / "force").string()) == 2);
  // malformed config -> exit 1
  flr::write_text_file((dir / "bad.cfg").string(), "[filters]\np_list = -3\n");
  CHECK(run("filters-check --config " + (dir / "bad.cfg").string() + " --out " +
            (dir / "bad").string()) == 1);
}

TEST_CASE("rates rejects underpowered runs with exit 3" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("underpowered");
  flr::write_text_file((dir / "run.cfg").string(),
                       "[scenario]\nM = 16\nseed = 23\n\n[harness]\nn_grid = 32,64,128,256\n"
                       "replicates = 1\nmetrics = l2\n");
  CHECK(run("rates --config " + (dir / "run.cfg").string() + " --out " + (dir / "out").string()) == 3);
}

TEST_CASE("lowerbound config gates" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("lowerbound");
  flr::write_text_file((dir / "bad_u.cfg").string(), "[lowerbound]\nu = 0.5\n");
  CHECK(run("lowerbound --config " + (dir / "bad_u.cfg").string()) == 1);
  flr::write_text_file((dir / "bad_s2.cfg").string(), "[lowerbound]\nsigma2 = 0\n");
  CHECK(run("lowerbound --config " + (dir / "bad_s2.cfg").string()) == 1);
  CHECK(run("lowerbound --preset lowerbound-m16 --out " + (dir / "ok").string()) == 0);
}

TEST_CASE("curves ingestion through the CLI" * doctest::skip(!cli_path())) {
  const fs::path dir = fresh_dir("curves");
  // two curves sampled on a 64-point grid: phi_1 and 2*phi_2
  const int grid_points = 64;
  std::ostringstream curves;
  curves.precision(17);
  curves << "s";
  for (int g = 0; g < grid_points; ++g) curves << "," << static_cast<double>(g) / (grid_points - 1);
  curves << "\n";
  for (int k = 0; k < 2; ++k) {
    curves << "curve" << k;
    for (int g = 0; g < grid_points; ++g) {
      const double s = static_cast<double>(g) / (grid_points - 1);
      const double phi = std::sqrt(2.0) * std::sin(((k == 0 ? 1.0 : 2.0) - 0.5) * 3.14159265358979323846 * s);
      curves << "," << (k == 0 ? phi : 2.0 * phi);
    }
    curves << "\n";
  }
  flr::write_text_file((dir / "curves.csv").string(), curves.str());
  flr::write_text_file((dir / "y.txt").string(), "1.0\n2.0\n");
  flr::write_text_file((dir / "fit.cfg").string(),
                       "[scenario]\nM = 8\n\n[fit]\nlambda = 0.05\ncurves = " +
                           (dir / "curves.csv").string() + "\nresponses = " + (dir / "y.txt").string() +
                           "\ngrid_points = 64\n");
  REQUIRE(run("fit --config " + (dir / "fit.cfg").string() + " --out " + (dir / "fit").string()) == 0);
  const json fit = json::parse(flr::read_text_file((dir / "fit" / "fit.json").string()));
  CHECK(fit.at("errors") == "unavailable");
  CHECK(fit.at("diagnostics").at("n") == 2);
}
