#include "diracspec/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "diracspec/expr.hpp"

namespace dirac {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json scan_defaults() {
  return ordered_json{{"re_anchor", 0.35},
                      {"taus", {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}},
                      {"p", 2.0},
                      {"q", 2.0},
                      {"probes", 6}};
}

ordered_json default_tree() {
  ordered_json j;
  j["boundary"] = {{"preset", "dirichlet"}, {"parameter", 0.5}, {"matrix", nullptr}};
  j["potential"] = {{"q1", nullptr},
                    {"q2", nullptr},
                    {"q3", nullptr},
                    {"q4", nullptr},
                    {"p_class", 2.0},
                    {"R_bound", nullptr},
                    {"breakpoints", ordered_json::array()},
                    {"singular_points", ordered_json::array()}};
  j["solver"] = {{"grid_cells", 2048}, {"ode_method", "cf4"},
                 {"ode_tol", 1e-10},  {"min_cells", 256},
                 {"max_cells", 32768}, {"alpha", 1.0},
                 {"weight_prefactor", 1.0}};
  j["command"] = {{"n_min", -10},
                  {"n_max", 10},
                  {"lambda", {10.0, 0.0}},
                  {"pruefer_kind", "s"},
                  {"f1", "1"},
                  {"f2", "0"},
                  {"epsilon", 0.4},
                  {"radius", 0.4},
                  {"winding_samples", 256},
                  {"basis_N", {8, 16, 32}},
                  {"bracket", false},
                  {"probes", 32},
                  {"scan", nullptr}};
  j["output"] = {{"dir", "."}, {"prefix", "run"}};
  j["seed"] = 1;
  j["threads"] = 1;
  return j;
}

void merge_into(ordered_json& base, const ordered_json& user,
                const std::string& path) {
  if (!user.is_object())
    throw ConfigError((path.empty() ? std::string("config") : path) +
                      ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string p = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key: " + p);
    ordered_json& slot = base[it.key()];
    // A scan block replaces the null placeholder with its own defaults first
    // so partial user blocks are completed and unknown keys are caught.
    if (p == "command.scan" && it.value().is_object() && slot.is_null())
      slot = scan_defaults();
    if (slot.is_object() && it.value().is_object()) {
      merge_into(slot, it.value(), p);
    } else {
      slot = it.value();
    }
  }
}

double expect_double(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

long expect_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<long>();
}

bool expect_bool(const ordered_json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

std::string expect_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

Cx expect_complex(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return Cx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Cx(j[0].get<double>(), j[1].get<double>());
  throw ConfigError(path + ": expected a number or an [re, im] pair");
}

ScalarCoef parse_coef(const ordered_json& j, const std::string& path) {
  if (j.is_null()) return ScalarCoef::zero();
  if (j.is_string()) {
    try {
      return ScalarCoef::expression(j.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (j.is_number() || j.is_array()) {
    const Cx c = expect_complex(j, path);
    if (c == Cx{}) return ScalarCoef::zero();
    return ScalarCoef::function([c](double) { return c; });
  }
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "grid")
        throw ConfigError(path + "." + it.key() + ": unknown key");
    if (!j.contains("grid") || !j["grid"].is_object())
      throw ConfigError(path + ".grid: expected an object with x / re / im");
    const auto& g = j["grid"];
    for (auto it = g.begin(); it != g.end(); ++it)
      if (it.key() != "x" && it.key() != "re" && it.key() != "im")
        throw ConfigError(path + ".grid." + it.key() + ": unknown key");
    if (!g.contains("x") || !g["x"].is_array() || !g.contains("re") ||
        !g["re"].is_array())
      throw ConfigError(path + ".grid: x and re arrays are required");
    std::vector<double> xs;
    std::vector<Cx> vs;
    const auto& xa = g["x"];
    const auto& ra = g["re"];
    if (xa.size() != ra.size() || xa.size() < 2)
      throw ConfigError(path + ".grid: x and re must have equal length >= 2");
    const bool has_im = g.contains("im") && !g["im"].is_null();
    if (has_im && g["im"].size() != xa.size())
      throw ConfigError(path + ".grid: im length differs from x");
    double prev = -1.0;
    for (size_t i = 0; i < xa.size(); ++i) {
      const double x = expect_double(xa[i], path + ".grid.x");
      if (x < -1e-12 || x > PI + 1e-12 || x <= prev)
        throw ConfigError(path +
                          ".grid.x: nodes must increase within [0, pi]");
      prev = x;
      const double re = expect_double(ra[i], path + ".grid.re");
      const double im =
          has_im ? expect_double(g["im"][i], path + ".grid.im") : 0.0;
      xs.push_back(x);
      vs.push_back(Cx(re, im));
    }
    return ScalarCoef::samples(std::move(xs), std::move(vs));
  }
  throw ConfigError(path +
                    ": expected null, a number, [re, im], an expression "
                    "string, or {\"grid\": ...}");
}

BoundaryForm parse_boundary(const ordered_json& b, std::string& desc) {
  if (!b["matrix"].is_null()) {
    const auto& m = b["matrix"];
    if (!m.is_array() || m.size() != 2)
      throw ConfigError("boundary.matrix: expected 2 rows");
    Cx u[2][4];
    for (int r = 0; r < 2; ++r) {
      if (!m[r].is_array() || m[r].size() != 4)
        throw ConfigError("boundary.matrix: each row needs 4 entries");
      for (int c = 0; c < 4; ++c)
        u[r][c] = expect_complex(m[r][c], "boundary.matrix");
    }
    BoundaryForm bf;
    bf.A = Mat2{u[0][0], u[0][1], u[1][0], u[1][1]};
    bf.B = Mat2{u[0][2], u[0][3], u[1][2], u[1][3]};
    if (!bf.full_rank())
      throw ConfigError("boundary.matrix: the 2x4 matrix must have rank 2");
    desc = "matrix";
    return bf;
  }
  const std::string preset = expect_string(b["preset"], "boundary.preset");
  desc = preset;
  if (preset == "dirichlet") return dirichlet_form();
  if (preset == "dirichlet_neumann" || preset == "dirichlet-neumann")
    return dirichlet_neumann_form();
  if (preset == "periodic") return periodic_form();
  if (preset == "antiperiodic") return antiperiodic_form();
  if (preset == "quasiperiodic")
    return quasiperiodic_form(expect_double(b["parameter"], "boundary.parameter"));
  throw ConfigError("boundary.preset: unknown preset '" + preset + "'");
}

RunConfig from_tree(ordered_json tree) {
  RunConfig cfg;

  cfg.bc = parse_boundary(tree["boundary"], cfg.boundary_desc);

  const auto& pj = tree["potential"];
  cfg.Q.q1 = parse_coef(pj["q1"], "potential.q1");
  cfg.Q.q2 = parse_coef(pj["q2"], "potential.q2");
  cfg.Q.q3 = parse_coef(pj["q3"], "potential.q3");
  cfg.Q.q4 = parse_coef(pj["q4"], "potential.q4");
  cfg.Q.p = expect_double(pj["p_class"], "potential.p_class");
  if (cfg.Q.p < 1.0 || cfg.Q.p > 2.0)
    throw ConfigError("potential.p_class: must lie in [1, 2]");
  if (!pj["R_bound"].is_null()) {
    const double r = expect_double(pj["R_bound"], "potential.R_bound");
    if (!(r > 0.0)) throw ConfigError("potential.R_bound: must be positive");
    cfg.Q.R_bound = r;
  }
  for (const auto& v : pj["breakpoints"]) {
    const double x = expect_double(v, "potential.breakpoints");
    if (x <= 1e-12 || x >= PI - 1e-12)
      throw ConfigError("potential.breakpoints: must lie strictly inside (0, pi)");
    cfg.Q.breakpoints.push_back(x);
  }
  for (const auto& v : pj["singular_points"]) {
    const double x = expect_double(v, "potential.singular_points");
    if (std::abs(x) > 1e-9 && std::abs(x - PI) > 1e-9)
      throw ConfigError("potential.singular_points: only the endpoints 0 and pi");
    cfg.Q.singular_points.push_back(x);
  }

  const auto& sj = tree["solver"];
  cfg.grid_cells = static_cast<int>(expect_int(sj["grid_cells"], "solver.grid_cells"));
  if (cfg.grid_cells < 16 || cfg.grid_cells > 65536)
    throw ConfigError("solver.grid_cells: must lie in [16, 65536]");
  const std::string method = expect_string(sj["ode_method"], "solver.ode_method");
  if (method == "cf4")
    cfg.solve.method = OdeMethod::CF4;
  else if (method == "rk45")
    cfg.solve.method = OdeMethod::RK45;
  else
    throw ConfigError("solver.ode_method: expected \"cf4\" or \"rk45\"");
  cfg.solve.tol = expect_double(sj["ode_tol"], "solver.ode_tol");
  if (!(cfg.solve.tol > 0.0) || cfg.solve.tol > 1e-2)
    throw ConfigError("solver.ode_tol: must lie in (0, 1e-2]");
  cfg.solve.min_cells = static_cast<int>(expect_int(sj["min_cells"], "solver.min_cells"));
  cfg.solve.max_cells = static_cast<int>(expect_int(sj["max_cells"], "solver.max_cells"));
  if (cfg.solve.min_cells < 16 || cfg.solve.max_cells < cfg.solve.min_cells)
    throw ConfigError("solver.min_cells/max_cells: need 16 <= min <= max");
  cfg.alpha = expect_double(sj["alpha"], "solver.alpha");
  if (!(cfg.alpha > 0.0)) throw ConfigError("solver.alpha: must be positive");
  cfg.weight_prefactor =
      expect_double(sj["weight_prefactor"], "solver.weight_prefactor");
  if (!(cfg.weight_prefactor > 0.0))
    throw ConfigError("solver.weight_prefactor: must be positive");

  const auto& cj = tree["command"];
  cfg.n_min = expect_int(cj["n_min"], "command.n_min");
  cfg.n_max = expect_int(cj["n_max"], "command.n_max");
  if (cfg.n_min > cfg.n_max)
    throw ConfigError("command.n_min: must not exceed command.n_max");
  if (cfg.n_max - cfg.n_min > 4096)
    throw ConfigError("command.n_max: range wider than 4096 indices");
  cfg.lambda = expect_complex(cj["lambda"], "command.lambda");
  cfg.pruefer_kind = expect_string(cj["pruefer_kind"], "command.pruefer_kind");
  if (cfg.pruefer_kind != "s" && cfg.pruefer_kind != "c")
    throw ConfigError("command.pruefer_kind: expected \"s\" or \"c\"");
  cfg.f1 = expect_string(cj["f1"], "command.f1");
  cfg.f2 = expect_string(cj["f2"], "command.f2");
  cfg.epsilon = expect_double(cj["epsilon"], "command.epsilon");
  if (!(cfg.epsilon > 0.0) || cfg.epsilon > 1.0)
    throw ConfigError("command.epsilon: must lie in (0, 1]");
  cfg.localize.radius = expect_double(cj["radius"], "command.radius");
  if (!(cfg.localize.radius > 0.0) || cfg.localize.radius > 0.5)
    throw ConfigError("command.radius: must lie in (0, 0.5]");
  const long ws = expect_int(cj["winding_samples"], "command.winding_samples");
  if (ws < 32 || ws > 8192 || (ws & (ws - 1)) != 0)
    throw ConfigError(
        "command.winding_samples: must be a power of two in [32, 8192]");
  cfg.localize.winding_samples = static_cast<int>(ws);
  cfg.localize.max_winding_samples =
      std::max(cfg.localize.max_winding_samples, cfg.localize.winding_samples);
  if (!cj["basis_N"].is_array() || cj["basis_N"].empty())
    throw ConfigError("command.basis_N: expected a nonempty array");
  cfg.basis_N.clear();
  for (const auto& v : cj["basis_N"]) {
    const long N = expect_int(v, "command.basis_N");
    if (N < 1 || N > 256)
      throw ConfigError("command.basis_N: entries must lie in [1, 256]");
    cfg.basis_N.push_back(static_cast<int>(N));
  }
  cfg.bracket = expect_bool(cj["bracket"], "command.bracket");
  cfg.probes = static_cast<int>(expect_int(cj["probes"], "command.probes"));
  if (cfg.probes < 1 || cfg.probes > 1024)
    throw ConfigError("command.probes: must lie in [1, 1024]");
  if (!cj["scan"].is_null()) {
    const auto& sc = cj["scan"];
    RunConfig::Scan scan;
    scan.re_anchor = expect_double(sc["re_anchor"], "command.scan.re_anchor");
    if (!sc["taus"].is_array() || sc["taus"].empty())
      throw ConfigError("command.scan.taus: expected a nonempty array");
    double prev = 0.0;
    for (const auto& v : sc["taus"]) {
      const double t = expect_double(v, "command.scan.taus");
      if (t <= prev)
        throw ConfigError("command.scan.taus: must be positive and increasing");
      prev = t;
      scan.taus.push_back(t);
    }
    if (sc["p"].is_string() && sc["p"].get<std::string>() == "inf")
      scan.p = 1e300;
    else
      scan.p = expect_double(sc["p"], "command.scan.p");
    if (sc["q"].is_string() && sc["q"].get<std::string>() == "inf")
      scan.q = 1e300;
    else
      scan.q = expect_double(sc["q"], "command.scan.q");
    if (scan.p < 1.0 || (scan.q < scan.p && scan.q < 1e299))
      throw ConfigError("command.scan.p/q: need 1 <= p <= q");
    scan.probes = static_cast<int>(expect_int(sc["probes"], "command.scan.probes"));
    if (scan.probes < 1 || scan.probes > 256)
      throw ConfigError("command.scan.probes: must lie in [1, 256]");
    cfg.scan = scan;
  }

  if (!tree["seed"].is_number_unsigned() && !tree["seed"].is_number_integer())
    throw ConfigError("seed: expected a nonnegative integer");
  if (tree["seed"].is_number_integer() && tree["seed"].get<long long>() < 0)
    throw ConfigError("seed: expected a nonnegative integer");
  cfg.seed = tree["seed"].get<std::uint64_t>();
  cfg.threads = static_cast<int>(expect_int(tree["threads"], "threads"));
  if (cfg.threads < 1 || cfg.threads > 256)
    throw ConfigError("threads: must lie in [1, 256]");

  const auto& oj = tree["output"];
  cfg.out_dir = expect_string(oj["dir"], "output.dir");
  cfg.prefix = expect_string(oj["prefix"], "output.prefix");
  if (cfg.out_dir.empty()) throw ConfigError("output.dir: must be nonempty");
  if (cfg.prefix.empty()) throw ConfigError("output.prefix: must be nonempty");

  cfg.effective_json = tree.dump(2) + "\n";
  return cfg;
}

RunConfig build(const ordered_json& user, const CliOverrides& ov) {
  ordered_json tree = default_tree();
  if (!user.is_null()) merge_into(tree, user, "");
  if (ov.preset) {
    tree["boundary"]["preset"] = *ov.preset;
    tree["boundary"]["matrix"] = nullptr;
  }
  if (ov.seed) tree["seed"] = *ov.seed;
  if (ov.threads) tree["threads"] = *ov.threads;
  if (ov.out_dir) tree["output"]["dir"] = *ov.out_dir;
  return from_tree(std::move(tree));
}

}  // namespace

GridPtr RunConfig::make_grid() const {
  return Grid::make(grid_cells, Q.breakpoints);
}

SpectralProblem RunConfig::make_problem() const {
  return SpectralProblem(Q, bc, make_grid(), solve);
}

RunConfig parse_config(const std::string& text, const CliOverrides& ov) {
  ordered_json user;
  if (!text.empty()) {
    try {
      user = ordered_json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
  }
  return build(user, ov);
}

RunConfig load_config(const std::string& path, const CliOverrides& ov) {
  if (path.empty()) return build(ordered_json(), ov);
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not readable: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), ov);
}

}  // namespace dirac
