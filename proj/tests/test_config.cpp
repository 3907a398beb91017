#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "diracspec/boundary.hpp"
#include "diracspec/config.hpp"
#include "diracspec/runner.hpp"
#include "diracspec/types.hpp"

using namespace dirac;

TEST_CASE("empty config produces the documented defaults") {
  const RunConfig cfg = parse_config("{}");
  CHECK(cfg.grid_cells == 2048);
  CHECK(cfg.n_min == -10);
  CHECK(cfg.n_max == 10);
  CHECK(cfg.seed == 1);
  CHECK(cfg.threads == 1);
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.prefix == "run");
  CHECK(cfg.boundary_desc == "dirichlet");
  CHECK(!cfg.scan.has_value());
  // Every default is echoed.
  CHECK(cfg.effective_json.find("\"grid_cells\": 2048") != std::string::npos);
  CHECK(cfg.effective_json.find("\"ode_method\": \"cf4\"") != std::string::npos);
  CHECK(cfg.effective_json.find("\"prefix\": \"run\"") != std::string::npos);
}

TEST_CASE("parsing is deterministic") {
  const std::string text =
      "{\"potential\": {\"q1\": \"0.2*cos(x)\"}, \"seed\": 9}";
  const RunConfig a = parse_config(text);
  const RunConfig b = parse_config(text);
  CHECK(a.effective_json == b.effective_json);
  CHECK(a.seed == 9);
}

TEST_CASE("unknown keys are rejected with their full path") {
  try {
    parse_config("{\"command\": {\"foo\": 1}}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("command.foo") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{\"spectrum\": {}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("boundary presets and explicit matrices") {
  const RunConfig qp = parse_config(
      "{\"boundary\": {\"preset\": \"quasiperiodic\", \"parameter\": 0.7}}");
  CHECK(qp.boundary_desc == "quasiperiodic");
  const auto cls = classify(qp.bc, Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::StronglyRegular);

  // Explicit matrix equal to the dirichlet rows.
  const RunConfig mx = parse_config(R"json({"boundary": {"matrix": [
      [[1,0],[0,0],[0,0],[0,0]],
      [[0,0],[0,0],[1,0],[0,0]]]}})json");
  CHECK(mx.boundary_desc == "matrix");
  CHECK(std::abs(mx.bc.A.m11 - Cx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(mx.bc.B.m21 - Cx(1.0, 0.0)) < 1e-15);

  // Rank-deficient matrices are refused with a pointed message.
  try {
    parse_config(R"json({"boundary": {"matrix": [
        [[1,0],[0,0],[0,0],[0,0]],
        [[2,0],[0,0],[0,0],[0,0]]]}})json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("boundary.matrix") != std::string::npos);
  }
}

TEST_CASE("coefficient forms: expression, constant, samples") {
  const RunConfig ce = parse_config(
      "{\"potential\": {\"q1\": \"0.3*sin(x)\", \"q2\": 0.25, "
      "\"q3\": [0.1, -0.2]}}");
  CHECK(std::abs(ce.Q.q1(1.0) - Cx(0.3 * std::sin(1.0), 0.0)) < 1e-15);
  CHECK(std::abs(ce.Q.q2(2.0) - Cx(0.25, 0.0)) < 1e-15);
  CHECK(std::abs(ce.Q.q3(0.4) - Cx(0.1, -0.2)) < 1e-15);
  CHECK(ce.Q.q4.is_zero());

  const RunConfig cs = parse_config(R"json({"potential": {"q1": {"grid": {
      "x": [0.0, 1.5, 3.141592653589793],
      "re": [1.0, 2.0, 0.5],
      "im": [0.0, -1.0, 0.0]}}}})json");
  CHECK(std::abs(cs.Q.q1(0.0) - Cx(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(cs.Q.q1(1.5) - Cx(2.0, -1.0)) < 1e-12);

  CHECK_THROWS_AS(parse_config("{\"potential\": {\"q1\": \"cos(\"}}"),
                  ConfigError);
  // Sample abscissae must be increasing and inside [0, pi].
  CHECK_THROWS_AS(parse_config(R"json({"potential": {"q1": {"grid": {
      "x": [0.0, 2.0, 1.0], "re": [1, 2, 3]}}}})json"),
                  ConfigError);
}

TEST_CASE("validation bounds are enforced") {
  CHECK_THROWS_AS(parse_config("{\"potential\": {\"p_class\": 3.0}}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{\"solver\": {\"grid_cells\": 4}}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{\"solver\": {\"ode_method\": \"euler\"}}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{\"command\": {\"winding_samples\": 100}}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{\"command\": {\"n_min\": 5, \"n_max\": 1}}"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config("{\"command\": {\"scan\": {\"taus\": [4.0, 2.0]}}}"),
      ConfigError);
  CHECK_THROWS_AS(parse_config("{\"potential\": {\"breakpoints\": [4.0]}}"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{\"threads\": 0}"), ConfigError);
}

TEST_CASE("command line overrides replace config values") {
  CliOverrides ov;
  ov.preset = "periodic";
  ov.seed = 77;
  ov.out_dir = "/tmp/elsewhere";
  const RunConfig cfg = parse_config(
      "{\"boundary\": {\"preset\": \"dirichlet\"}, \"seed\": 1}", ov);
  CHECK(cfg.boundary_desc == "periodic");
  CHECK(cfg.seed == 77);
  CHECK(cfg.out_dir == "/tmp/elsewhere");
  const auto sp = unperturbed_spectrum(cfg.bc, Cx(1.0, 0.0));
  CHECK(sp.multiplicity(0) == 2);
}

TEST_CASE("scan block fills its own defaults") {
  const RunConfig cfg = parse_config("{\"command\": {\"scan\": {}}}");
  REQUIRE(cfg.scan.has_value());
  CHECK(cfg.scan->re_anchor == doctest::Approx(0.35));
  CHECK(cfg.scan->taus.size() == 6);
  CHECK(cfg.scan->p == doctest::Approx(2.0));
  // "inf" selects the sup norm.
  const RunConfig ci = parse_config(
      "{\"command\": {\"scan\": {\"q\": \"inf\"}}}");
  CHECK(ci.scan->q > 1e100);
}

TEST_CASE("made problems reflect grid and breakpoints") {
  const RunConfig cfg = parse_config(R"json({
    "potential": {"q1": "0.1*cos(x)", "breakpoints": [1.0]},
    "solver": {"grid_cells": 64}})json");
  const auto grid = cfg.make_grid();
  bool found = false;
  for (double e : grid->edges())
    if (std::abs(e - 1.0) < 1e-14) found = true;
  CHECK(found);
  const auto p = cfg.make_problem();
  CHECK(p.classification().kind == BoundaryClass::StronglyRegular);
}

TEST_CASE("run artifacts are byte-identical across reruns") {
  namespace fs = std::filesystem;
  const fs::path dir1 = fs::temp_directory_path() / "dirac_cfg_rerun1";
  const fs::path dir2 = fs::temp_directory_path() / "dirac_cfg_rerun2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  auto run_into = [](const fs::path& d) {
    CliOverrides ov;
    ov.out_dir = d.string();
    const RunConfig cfg = parse_config(
        R"json({"potential": {"q1": "0.2*cos(x)"},
            "command": {"n_min": -2, "n_max": 2},
            "solver": {"grid_cells": 64}})json",
        ov);
    const RunResult r = run_command("spectrum", cfg);
    REQUIRE(r.exit_code == 0);
    return r;
  };
  const RunResult r1 = run_into(dir1);
  const RunResult r2 = run_into(dir2);
  REQUIRE(r1.artifacts.size() == r2.artifacts.size());
  for (size_t i = 0; i < r1.artifacts.size(); ++i) {
    std::ifstream f1(r1.artifacts[i], std::ios::binary);
    std::ifstream f2(r2.artifacts[i], std::ios::binary);
    REQUIRE(f1.good());
    REQUIRE(f2.good());
    const std::string s1((std::istreambuf_iterator<char>(f1)),
                         std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    // The sidecar echoes the output directory; mask that one difference.
    size_t pos;
    while ((pos = s2.find(dir2.string())) != std::string::npos)
      s2.replace(pos, dir2.string().size(), dir1.string());
    CHECK(s1 == s2);
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("unknown subcommand is a config error") {
  const RunConfig cfg = parse_config("{}");
  CHECK_THROWS_AS(run_command("wibble", cfg), ConfigError);
}
