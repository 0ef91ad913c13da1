#include <doctest.h>

#include <nlohmann/json.hpp>

#include "flr/config.hpp"

using namespace flr;

TEST_CASE("all presets exist and validate") {
  for (const std::string& name : preset_names()) {
    const AppConfig cfg = config_from_doc(parse_config_text(preset_text(name)));
    CHECK_FALSE(config_hash_hex(cfg).empty());
  }
  CHECK(preset_names() == std::vector<std::string>{"comm-brownian-cubic-a05", "comm-saturation-a3",
                                                   "noncomm-s1", "lowerbound-m16"});
  CHECK_THROWS_AS(preset_text("no-such-preset"), ParseError);
}

TEST_CASE("assumption ranges are enforced with full diagnostics") {
  // t below the decay assumption
  const char* bad_t = "[scenario]\nmode = commutative\nbasis = power\nt = 0.5\n";
  try {
    config_from_doc(parse_config_text(bad_t));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    bool found = false;
    for (const auto& issue : e.issues())
      if (issue.find("scenario.t") != std::string::npos &&
          issue.find("exceed 1") != std::string::npos)
        found = true;
    CHECK(found);
  }

  // two simultaneous violations produce two diagnostics
  const char* two_bad = "[scenario]\nbasis = power\nt = 0.5\nalpha = -1\n";
  try {
    config_from_doc(parse_config_text(two_bad));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    int hits = 0;
    for (const auto& issue : e.issues()) {
      if (issue.find("scenario.t") != std::string::npos) ++hits;
      if (issue.find("scenario.alpha") != std::string::npos) ++hits;
    }
    CHECK(hits >= 2);
  }
}

TEST_CASE("theorem 4.1's u range and positive sigma^2 are enforced") {
  CHECK_THROWS_AS(config_from_doc(parse_config_text("[lowerbound]\nu = 0.5\n")), ValidationError);
  CHECK_THROWS_AS(config_from_doc(parse_config_text("[lowerbound]\nu = 0.125\n")), ValidationError);
  CHECK_THROWS_AS(config_from_doc(parse_config_text("[lowerbound]\nsigma2 = 0\n")), ValidationError);
  CHECK_NOTHROW(config_from_doc(parse_config_text("[lowerbound]\nu = 0.124\n")));
}

TEST_CASE("unknown sections and keys are reported") {
  CHECK_THROWS_AS(config_from_doc(parse_config_text("[scnario]\nM = 16\n")), ValidationError);
  CHECK_THROWS_AS(config_from_doc(parse_config_text("[scenario]\nMM = 16\n")), ValidationError);
}

TEST_CASE("parse errors carry line context") {
  try {
    parse_config_text("[scenario]\nthis line has no equals sign\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("serialization round trips") {
  const AppConfig cfg = config_from_doc(parse_config_text(preset_text("noncomm-s1")));
  const ConfigDoc doc = doc_from_config(cfg);
  const std::string text = serialize_config(doc);
  // parse(serialize(x)) = x at the document level
  CHECK(parse_config_text(text) == doc);
  // serialize(parse(text)) is canonical and stable
  const AppConfig cfg2 = config_from_doc(parse_config_text(text));
  CHECK(serialize_config(doc_from_config(cfg2)) == text);
  CHECK(canonical_json(cfg2).dump() == canonical_json(cfg).dump());
}

TEST_CASE("config hash is stable and sensitive") {
  const AppConfig a = config_from_doc(parse_config_text(preset_text("comm-brownian-cubic-a05")));
  AppConfig b = a;
  CHECK(config_hash_hex(a) == config_hash_hex(b));
  CHECK(config_hash_hex(a).size() == 16);
  b.scenario.seed += 1;
  CHECK(config_hash_hex(a) != config_hash_hex(b));
}

TEST_CASE("metric restrictions depend on the scenario") {
  const char* noncomm_l2 =
      "[scenario]\nmode = noncommutative\n\n[harness]\nmetrics = l2\n";
  CHECK_THROWS_AS(config_from_doc(parse_config_text(noncomm_l2)), ValidationError);
  const char* low_alpha_rkhs =
      "[scenario]\nmode = commutative\nbasis = power\nalpha = 0.3\n\n[harness]\nmetrics = rkhs\n";
  CHECK_THROWS_AS(config_from_doc(parse_config_text(low_alpha_rkhs)), ValidationError);
}

TEST_CASE("brownian-cubic basis pins the decay exponents") {
  const char* wrong_decay = "[scenario]\nmode = commutative\nbasis = brownian-cubic\nt = 3\n";
  CHECK_THROWS_AS(config_from_doc(parse_config_text(wrong_decay)), ValidationError);
}
