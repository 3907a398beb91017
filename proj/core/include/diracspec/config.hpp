#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diracspec/boundary.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/solutions.hpp"
#include "diracspec/spectrum.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// Command-line values that override the corresponding config fields.
struct CliOverrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

// A fully validated run configuration. `effective_json` is the complete
// configuration the run actually uses, defaults and overrides filled in,
// serialized for the output sidecar.
struct RunConfig {
  std::string effective_json;

  Potential Q;
  BoundaryForm bc;
  std::string boundary_desc;  // preset name or "matrix"

  int grid_cells = 2048;
  SolveOptions solve;
  double alpha = 1.0;             // strip half-width for remainder bounds
  double weight_prefactor = 1.0;  // comparison-model prefactor switch

  long n_min = -10, n_max = 10;
  Cx lambda{10.0, 0.0};          // target for fundsys / pruefer / green0
  std::string pruefer_kind = "s";
  std::string f1 = "1", f2 = "0";  // right-hand side for green0

  double epsilon = 0.4;  // comparison disk radius for verify
  LocalizeOptions localize;
  std::vector<int> basis_N{8, 16, 32};
  bool bracket = false;
  int probes = 32;

  struct Scan {
    double re_anchor = 0.35;
    std::vector<double> taus;
    double p = 2.0, q = 2.0;
    int probes = 6;
  };
  std::optional<Scan> scan;

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  std::string prefix = "run";

  GridPtr make_grid() const;
  SpectralProblem make_problem() const;
};

// Parses and validates a config file (JSON with comments permitted); an
// empty path gives the defaults. Throws ConfigError with the offending field
// path on any validation failure.
RunConfig load_config(const std::string& path, const CliOverrides& ov = {});

// Parses a config from an in-memory string (tests, presets).
RunConfig parse_config(const std::string& text, const CliOverrides& ov = {});

}  // namespace dirac
