#include <cmath>
#include <filesystem>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "suites.hpp"

using namespace brz;
using namespace brz::cli;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "run.conf");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int line_of(const std::string& text) {
  try {
    parse_config(text, "run.conf");
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment\n"
      "alpha = 0.5, 1   # trailing comment\n"
      "\n"
      "p = 1.5, 4\n"
      "kappa = 0, 0.05\n"
      "seed = 12\n"
      "grid.profile = composite-log-linear\n"
      "bellman.light = false\n");
  CHECK(c.dim() == 2);
  CHECK(c.alpha == std::vector<double>{0.5, 1.0});
  CHECK(c.p == std::vector<double>{1.5, 4.0});
  CHECK(c.kappa == std::vector<double>{0.0, 0.05});
  CHECK(c.seed_value() == 12);
  CHECK(c.profile == GridProfile::composite_log_linear);
  CHECK_FALSE(c.bellman_light);
  CHECK(c.n == 96);

  SUBCASE("d repeats a single alpha") {
    const auto r = parse_config("alpha = 0.5\nd = 3\n");
    CHECK(r.alpha == std::vector<double>{0.5, 0.5, 0.5});
  }
  SUBCASE("alpha patterns") {
    CHECK(alpha_pattern("mixed", 2) == std::vector<double>{0.5, 1.0});
    CHECK(alpha_pattern("zero", 3) == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(alpha_pattern("odd", 1), std::invalid_argument);
  }
}

TEST_CASE("config errors carry the line") {
  CHECK(line_of("alpha = 0.5\n\nbogus = 1\n") == 3);
  CHECK(error_of("alpha = 0.5\n\nbogus = 1\n").find("run.conf:3") == 0);
  CHECK(line_of("p = 2\nseed = 1\np = 3\n") == 3);
  CHECK(error_of("p = 2\nseed = 1\np = 3\n").find("line 1") != std::string::npos);
  CHECK(line_of("seed = 1\nkappa 0.1\n") == 2);
  CHECK(line_of("grid.n = 9x\n") == 1);
  CHECK(line_of("trials = 2.5\n") == 1);
  CHECK(line_of("bellman.light = maybe\n") == 1);
  CHECK(line_of("alpha = 0.5, -1\n") == 1);
  CHECK(line_of("seed = 1\nalpha = 0, 1\nd = 3\n") == 3);
  CHECK(line_of("\nalpha = 0,0,0,0\n") == 2);
  CHECK(line_of("alpha = 0,0,0\ngrid.n = 200\n") == 2);
  CHECK(line_of("time.t_min = 2\ntime.t_max = 1\n") == 2);

  SUBCASE("empty p list") {
    CHECK(line_of("seed = 3\np =\n") == 2);
    CHECK(error_of("seed = 3\np =\n").find("p list is empty") != std::string::npos);
    CHECK(line_of("p = , \n") == 1);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/run.conf"), ConfigError); }
}

TEST_CASE("shipped configs parse") {
  int count = 0;
  for (const auto& e : std::filesystem::directory_iterator(BRZ_CONFIG_DIR)) {
    if (e.path().extension() != ".conf") continue;
    INFO(e.path().string());
    const auto c = load_config(e.path().string());
    CHECK(c.seed.has_value());
    ++count;
  }
  CHECK(count >= 5);
}

TEST_CASE("resolved config and hash") {
  const auto a = parse_config("seed = 5\noutput = one\n");
  const auto b = parse_config("output = two\nseed = 5\n# same\n");
  const auto c = parse_config("seed = 6\n");
  RunReport ra, rb, rc;
  ra.config = a.resolved();
  rb.config = b.resolved();
  rc.config = c.resolved();
  CHECK(ra.config_hash() == rb.config_hash());
  CHECK(ra.config_hash() != rc.config_hash());
  bool has_seed = false;
  for (const auto& [k, v] : a.resolved()) {
    CHECK(k != "output");
    if (k == "seed") has_seed = v == "5";
  }
  CHECK(has_seed);
  CHECK(config_reference().find("tol.lemma") != std::string::npos);
}

TEST_CASE("suites") {
  SUBCASE("seed is mandatory") {
    const auto c = parse_config("trials = 1\n");
    CHECK_THROWS_AS(run_hankel(c), std::invalid_argument);
    CHECK_THROWS_AS(run_suite("nothing", parse_config("seed = 1\n")), std::invalid_argument);
  }
  SUBCASE("hankel passes and repeats byte for byte") {
    const auto c = parse_config("alpha = 1\nseed = 3\ntrials = 3\n");
    const auto r1 = run_suite("hankel", c);
    const auto r2 = run_suite("hankel", c);
    CHECK(r1.pass());
    CHECK(r1.json() == r2.json());
    CHECK(r1.checks.size() == 4);
  }
  SUBCASE("bellman p = 2 away from the singular set certifies everywhere") {
    const auto c = parse_config("p = 2\nkappa = 0\nbellman.m2 = 1, 3\nbellman.samples = 300\nseed = 9\n");
    const auto r = run_bellman(c);
    CHECK(r.pass());
    int tau_rows = 0;
    for (const auto& row : r.checks) {
      if (row.check.find("tau interval") != std::string::npos) {
        ++tau_rows;
        CHECK(row.lhs <= 1e-6);
      }
      if (row.check.find("miss rate") != std::string::npos) CHECK(row.lhs == 0.0);
    }
    CHECK(tau_rows == 2);
  }
  SUBCASE("riesz p = 2 ratios stay within the energy identity") {
    const auto c = parse_config("p = 2\nseed = 4\ntrials = 3\n");
    const auto r = run_riesz(c);
    CHECK(r.pass());
    bool seen = false;
    for (const auto& t : r.tables) {
      if (t.name != "norm_ratio") continue;
      for (const auto& row : t.rows) {
        seen = true;
        CHECK(std::stod(row[5]) <= 1.0 + 1e-6);
      }
    }
    CHECK(seen);
  }
  SUBCASE("failing rows make the report fail") {
    RunReport r;
    r.add(CheckRow{"x", "ok", 0, 1, 0, "inequality", true, {}});
    CHECK(r.pass());
    r.add(CheckRow{"x", "bad", 2, 1, 0, "inequality", false, {}});
    CHECK_FALSE(r.pass());
    REQUIRE(r.failures().size() == 1);
    CHECK(r.failures()[0].find("bad") != std::string::npos);
  }
}
