#include "diracspec/runner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "diracspec/diagnostics.hpp"
#include "diracspec/expr.hpp"

namespace dirac {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

ordered_json cx_json(Cx v) { return ordered_json::array({v.real(), v.imag()}); }

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    write_row(header);
  }
  void write_row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct Emitter {
  const RunConfig& cfg;
  std::string sub;
  std::vector<std::string> artifacts;

  std::string path(const std::string& name, const std::string& ext) const {
    return cfg.out_dir + "/" + cfg.prefix + "_" + name + "." + ext;
  }
  std::string csv_path(const std::string& name) {
    const std::string p = path(name, "csv");
    artifacts.push_back(p);
    return p;
  }
  void sidecar(ordered_json summary) {
    const std::string p = path(sub, "json");
    ordered_json j;
    j["version"] = version_string();
    j["subcommand"] = sub;
    j["seed"] = cfg.seed;
    j["artifacts"] = artifacts;
    j["summary"] = std::move(summary);
    j["config"] = ordered_json::parse(cfg.effective_json);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + p);
    out << j.dump(2) << '\n';
    artifacts.push_back(p);
  }
};

ordered_json classification_json(const Classification& cls) {
  ordered_json j;
  j["kind"] = to_string(cls.kind);
  j["witnesses"] =
      ordered_json::array({cx_json(cls.witnesses[0]), cx_json(cls.witnesses[1])});
  j["b"] = cx_json(cls.b);
  j["discriminant"] = cx_json(cls.disc);
  j["weight_end"] = cx_json(cls.W_end);
  return j;
}

ordered_json spectrum0_json(const UnperturbedSpectrum& s) {
  ordered_json j;
  switch (s.kind) {
    case SpectrumKind::TwoSeries: j["kind"] = "TwoSeries"; break;
    case SpectrumKind::SingleSeries: j["kind"] = "SingleSeries"; break;
    case SpectrumKind::Empty: j["kind"] = "Empty"; break;
    case SpectrumKind::WholePlane: j["kind"] = "WholePlane"; break;
  }
  if (s.kind == SpectrumKind::TwoSeries || s.kind == SpectrumKind::SingleSeries) {
    j["z0"] = cx_json(s.z0);
    j["z1"] = cx_json(s.z1);
    j["kappa0"] = cx_json(s.kappa0);
    j["kappa1"] = cx_json(s.kappa1);
  }
  return j;
}

RunResult run_classify(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const Cx W = weight_end(cfg.Q);
  const Classification cls = classify(cfg.bc, W);
  const UnperturbedSpectrum s0 = unperturbed_spectrum(cfg.bc, W);

  CsvFile csv(em.csv_path(em.sub),
              {"kind[enum]", "re_a[1]", "im_a[1]", "re_abar[1]", "im_abar[1]",
               "re_b[1]", "im_b[1]", "re_disc[1]", "im_disc[1]", "re_W[1]",
               "im_W[1]"});
  csv.write_row({to_string(cls.kind), fmt(cls.a.real()), fmt(cls.a.imag()),
                 fmt(cls.abar.real()), fmt(cls.abar.imag()), fmt(cls.b.real()),
                 fmt(cls.b.imag()), fmt(cls.disc.real()), fmt(cls.disc.imag()),
                 fmt(W.real()), fmt(W.imag())});

  ordered_json summary = classification_json(cls);
  summary["spectrum"] = spectrum0_json(s0);
  summary["boundary"] = cfg.boundary_desc;
  em.sidecar(std::move(summary));
  return {0, em.artifacts, to_string(cls.kind)};
}

RunResult run_spectrum0(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const Cx W = weight_end(cfg.Q);
  const UnperturbedSpectrum s0 = unperturbed_spectrum(cfg.bc, W);

  CsvFile csv(em.csv_path(em.sub), {"n[index]", "re_lambda0[1]",
                                    "im_lambda0[1]", "multiplicity[count]"});
  long rows = 0;
  if (s0.kind == SpectrumKind::TwoSeries && s0.multiplicity(0) == 2) {
    // The two series coincide pairwise; enumerate distinct points kappa0+2m.
    for (long m = cfg.n_min; m <= cfg.n_max; ++m) {
      const Cx v = s0.kappa0 + Cx(2.0 * double(m), 0.0);
      csv.write_row({fmt(m), fmt(v.real()), fmt(v.imag()), "2"});
      ++rows;
    }
  } else if (s0.kind == SpectrumKind::TwoSeries) {
    for (long n = cfg.n_min; n <= cfg.n_max; ++n) {
      const Cx v = s0.lambda0(n);
      csv.write_row({fmt(n), fmt(v.real()), fmt(v.imag()), "1"});
      ++rows;
    }
  } else if (s0.kind == SpectrumKind::SingleSeries) {
    for (long m = cfg.n_min; m <= cfg.n_max; ++m) {
      const Cx v = s0.kappa0 + Cx(2.0 * double(m), 0.0);
      csv.write_row({fmt(m), fmt(v.real()), fmt(v.imag()), "1"});
      ++rows;
    }
  }

  ordered_json summary = spectrum0_json(s0);
  summary["classification"] = classification_json(s0.cls);
  summary["rows"] = rows;
  em.sidecar(std::move(summary));
  return {0, em.artifacts, ""};
}

RunResult run_fundsys(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const GridPtr grid = cfg.make_grid();
  const DiracSolver solver(cfg.Q);
  const FundamentalPair fp = solver.dense_pair(cfg.lambda, grid);
  const SampledPotential sp = sample(cfg.Q, grid);

  CsvFile csv(em.csv_path(em.sub),
              {"x[rad]", "re_c1[1]", "im_c1[1]", "re_c2[1]", "im_c2[1]",
               "re_s1[1]", "im_s1[1]", "re_s2[1]", "im_s2[1]"});
  double wronskian_drift = 0.0;
  for (int i = 0; i < grid->n_nodes(); ++i) {
    csv.write_row({fmt(grid->node(i)), fmt(fp.c.a[i].real()),
                   fmt(fp.c.a[i].imag()), fmt(fp.c.b[i].real()),
                   fmt(fp.c.b[i].imag()), fmt(fp.s.a[i].real()),
                   fmt(fp.s.a[i].imag()), fmt(fp.s.b[i].real()),
                   fmt(fp.s.b[i].imag())});
    const Cx det = fp.c.a[i] * fp.s.b[i] - fp.c.b[i] * fp.s.a[i];
    wronskian_drift =
        std::max(wronskian_drift, std::abs(det - sp.weight[i] * sp.weight[i]));
  }

  ordered_json summary;
  summary["lambda"] = cx_json(cfg.lambda);
  summary["err_estimate"] = fp.err_estimate;
  summary["max_wronskian_drift"] = wronskian_drift;
  em.sidecar(std::move(summary));
  return {0, em.artifacts, ""};
}

RunResult run_pruefer(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const GridPtr grid = cfg.make_grid();
  const SampledPotential sp = sample(cfg.Q, grid);
  const double R = cfg.Q.effective_R();
  const double pc = cfg.Q.conjugate_index();
  const PrueferKind kind =
      cfg.pruefer_kind == "c" ? PrueferKind::CType : PrueferKind::SType;
  const PrueferSolution ps =
      pruefer_solve(sp, R, pc, cfg.alpha, cfg.lambda, kind);

  CsvFile csv(em.csv_path(em.sub),
              {"x[rad]", "re_theta[rad]", "im_theta[rad]", "re_r[1]",
               "im_r[1]", "re_eta[rad]", "im_eta[rad]", "re_rho[1]",
               "im_rho[1]"});
  for (int i = 0; i < grid->n_nodes(); ++i) {
    csv.write_row({fmt(grid->node(i)), fmt(ps.theta.v[i].real()),
                   fmt(ps.theta.v[i].imag()), fmt(ps.r.v[i].real()),
                   fmt(ps.r.v[i].imag()), fmt(ps.eta.v[i].real()),
                   fmt(ps.eta.v[i].imag()), fmt(ps.rho.v[i].real()),
                   fmt(ps.rho.v[i].imag())});
  }

  const RemainderProfile prof = remainder_profile(sp, R, pc, cfg.alpha, cfg.lambda);
  ordered_json summary;
  summary["lambda"] = cx_json(cfg.lambda);
  summary["kind"] = cfg.pruefer_kind;
  summary["iterations"] = ps.iterations;
  summary["contraction_factor"] = ps.contraction_factor;
  summary["contraction_bound"] = ps.contraction_bound;
  summary["step_norm"] = ps.step_norm;
  summary["used_fallback"] = ps.used_fallback;
  summary["Ups_sup"] = prof.Ups_sup;
  summary["domain_threshold"] = prof.threshold;
  em.sidecar(std::move(summary));
  return {0, em.artifacts, ""};
}

RunResult run_spectrum(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const SpectralProblem problem = cfg.make_problem();
  const auto points = localize(problem, cfg.n_min, cfg.n_max, cfg.localize);

  CsvFile csv(em.csv_path(em.sub),
              {"n[index]", "re_lambda[1]", "im_lambda[1]", "re_lambda0[1]",
               "im_lambda0[1]", "radius[1]", "multiplicity[count]",
               "det_residual[1]"});
  double max_dev = 0.0;
  for (const auto& pt : points) {
    csv.write_row({fmt(pt.n), fmt(pt.lambda.real()), fmt(pt.lambda.imag()),
                   fmt(pt.anchor.real()), fmt(pt.anchor.imag()),
                   fmt(pt.radius), fmt(pt.multiplicity),
                   fmt(pt.det_residual)});
    max_dev = std::max(max_dev, std::abs(pt.lambda - pt.anchor));
  }

  ordered_json summary;
  summary["classification"] = classification_json(problem.classification());
  summary["shift"] = cx_json(problem.shift());
  summary["count"] = points.size();
  summary["max_deviation_from_anchor"] = max_dev;
  em.sidecar(std::move(summary));
  return {0, em.artifacts, ""};
}

RunResult run_green0(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const GridPtr grid = cfg.make_grid();

  auto ef1 = parse_expr(cfg.f1);
  auto ef2 = parse_expr(cfg.f2);
  GridFn2 f(grid);
  for (int i = 0; i < grid->n_nodes(); ++i) {
    f.a[i] = ef1(grid->node(i));
    f.b[i] = ef2(grid->node(i));
  }
  const GridFn2 y = green0_apply(cfg.bc, cfg.lambda, f);

  CsvFile csv(em.csv_path(em.sub),
              {"x[rad]", "re_y1[1]", "im_y1[1]", "re_y2[1]", "im_y2[1]",
               "re_f1[1]", "im_f1[1]", "re_f2[1]", "im_f2[1]"});
  for (int i = 0; i < grid->n_nodes(); ++i) {
    csv.write_row({fmt(grid->node(i)), fmt(y.a[i].real()), fmt(y.a[i].imag()),
                   fmt(y.b[i].real()), fmt(y.b[i].imag()), fmt(f.a[i].real()),
                   fmt(f.a[i].imag()), fmt(f.b[i].real()),
                   fmt(f.b[i].imag())});
  }

  // Equation residual -B y' - lambda y = f from the interpolant derivative.
  const auto da = grid->derivative(y.a);
  const auto db = grid->derivative(y.b);
  GridFn1 res(grid);
  for (int i = 0; i < grid->n_nodes(); ++i) {
    const Cx r1 = -db[i] - cfg.lambda * y.a[i] - f.a[i];
    const Cx r2 = da[i] - cfg.lambda * y.b[i] - f.b[i];
    res.v[i] = Cx(std::hypot(std::abs(r1), std::abs(r2)), 0.0);
  }
  const double residual = lp_norm(res, 2.0);

  ordered_json summary;
  summary["lambda"] = cx_json(cfg.lambda);
  summary["residual"] = residual;

  if (cfg.scan) {
    const auto& sc = *cfg.scan;
    const auto pts = resolvent0_norm_scan(cfg.bc, sc.re_anchor, sc.taus, sc.p,
                                          sc.q, sc.probes, cfg.seed, grid);
    CsvFile scsv(em.csv_path(em.sub + "_scan"),
                 {"tau[1]", "norm_estimate[1]"});
    for (const auto& p : pts)
      scsv.write_row({fmt(p.tau), fmt(p.norm_estimate)});
    // Log-log slope by least squares.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
      const double lx = std::log(p.tau), ly = std::log(p.norm_estimate);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = double(pts.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    ordered_json js;
    js["re_anchor"] = sc.re_anchor;
    js["p"] = sc.p >= 1e299 ? ordered_json("inf") : ordered_json(sc.p);
    js["q"] = sc.q >= 1e299 ? ordered_json("inf") : ordered_json(sc.q);
    js["loglog_slope"] = slope;
    summary["scan"] = std::move(js);
  }

  em.sidecar(std::move(summary));
  return {0, em.artifacts, ""};
}

RunResult run_verify(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const SpectralProblem problem = cfg.make_problem();
  std::vector<std::string> hard_failures;

  AsymptoticsOptions aopts;
  aopts.epsilon = cfg.epsilon;
  aopts.alpha = cfg.alpha;
  aopts.localize = cfg.localize;
  const AsymptoticsReport arep =
      asymptotics_report(problem, cfg.n_min, cfg.n_max, aopts);
  {
    CsvFile csv(em.csv_path("verify_asymptotics"),
                {"n[index]", "re_lambda[1]", "im_lambda[1]", "re_lambda0[1]",
                 "im_lambda0[1]", "dev[1]", "s_eps[1]", "c1[1]", "c2[1]",
                 "r_n[1]", "resolved[bool]", "inequality_ok[bool]"});
    for (const auto& r : arep.rows) {
      csv.write_row({fmt(r.n), fmt(r.lambda.real()), fmt(r.lambda.imag()),
                     fmt(r.anchor.real()), fmt(r.anchor.imag()), fmt(r.dev),
                     fmt(r.s_eps), fmt(r.c1), fmt(r.c2), fmt(r.r_n),
                     fmt(r.resolved), fmt(r.inequality_ok)});
      if (r.resolved && !r.inequality_ok)
        hard_failures.push_back("asymptotic inequality failed at n = " +
                                std::to_string(r.n));
    }
  }

  const auto points = localize(problem, cfg.n_min, cfg.n_max, cfg.localize);
  const EigenfunctionReport erep =
      eigenfunction_asymptotics(problem, points, cfg.weight_prefactor);
  const SpectralProblem adj = adjoint_problem(problem);
  const auto apoints = localize(adj, cfg.n_min, cfg.n_max, cfg.localize);
  const EigenfunctionReport earep =
      eigenfunction_asymptotics(adj, apoints, cfg.weight_prefactor);
  {
    CsvFile csv(em.csv_path("verify_eigenfunctions"),
                {"side[enum]", "n[index]", "re_lambda[1]", "im_lambda[1]",
                 "b_n[1]", "align[1]", "skipped[bool]"});
    for (const auto& r : erep.rows)
      csv.write_row({"primal", fmt(r.n), fmt(r.lambda.real()),
                     fmt(r.lambda.imag()), fmt(r.b_n), fmt(r.align),
                     fmt(r.skipped)});
    for (const auto& r : earep.rows)
      csv.write_row({"adjoint", fmt(r.n), fmt(r.lambda.real()),
                     fmt(r.lambda.imag()), fmt(r.b_n), fmt(r.align),
                     fmt(r.skipped)});
  }

  std::vector<BasisReport> breps;
  {
    CsvFile csv(em.csv_path("verify_basis"),
                {"N[index]", "bracket[bool]", "count[count]", "gram_cond[1]",
                 "biorth_max_err[1]", "alpha_min[1]", "alpha_max[1]",
                 "bessel_const[1]"});
    for (int N : cfg.basis_N) {
      BasisOptions bopts;
      bopts.bracket = cfg.bracket;
      bopts.n_probes = cfg.probes;
      bopts.seed = cfg.seed;
      bopts.localize = cfg.localize;
      const BasisReport br = basis_report(problem, N, bopts);
      breps.push_back(br);
      csv.write_row({fmt(br.N), fmt(br.bracket_mode), fmt(br.count),
                     fmt(br.gram_cond), fmt(br.biorth_max_err),
                     fmt(br.alpha_min), fmt(br.alpha_max),
                     fmt(br.bessel_const)});
      if (!(br.gram_cond < 1e299))
        hard_failures.push_back("Gram matrix numerically singular at N = " +
                                std::to_string(N));
    }
  }

  // Kadec-type Bessel constant on the localized points, rescaled to the
  // doubled lattice relative to the comparison points.
  ordered_json kadec_json;
  {
    std::vector<long> ns;
    std::vector<Cx> mus;
    for (const auto& pt : points) {
      ns.push_back(pt.n);
      mus.push_back(Cx(2.0 * double(pt.n), 0.0) +
                    2.0 * (pt.lambda - pt.anchor));
    }
    try {
      const KadecCheck kc = bessel_kadec_check(ns, mus, problem.Q().p,
                                               cfg.probes, cfg.seed,
                                               problem.grid());
      CsvFile csv(em.csv_path("verify_kadec"), {"probe[index]", "ratio[1]"});
      for (size_t i = 0; i < kc.per_probe.size(); ++i)
        csv.write_row({fmt(long(i)), fmt(kc.per_probe[i])});
      kadec_json["constant"] = kc.constant;
      kadec_json["sup_deviation"] = kc.sup_deviation;
      kadec_json["bound"] = kc.bound;
      kadec_json["applicable"] = true;
    } catch (const DomainError& e) {
      kadec_json["applicable"] = false;
      kadec_json["reason"] = e.what();
    }
  }

  ordered_json summary;
  summary["classification"] = classification_json(problem.classification());
  summary["asymptotics"] = {
      {"epsilon", arep.epsilon},
      {"two_simple_series", arep.two_simple_series},
      {"c_global", arep.c_global},
      {"fitted_M", arep.fitted_M},
      {"rows", arep.rows.size()},
      {"tail_s_last", arep.tail_s.empty() ? 0.0 : arep.tail_s.back()},
      {"tail_dev_last", arep.tail_dev.empty() ? 0.0 : arep.tail_dev.back()}};
  summary["eigenfunctions"] = {
      {"primal_tail_last", erep.tail.empty() ? 0.0 : erep.tail.back()},
      {"adjoint_tail_last", earep.tail.empty() ? 0.0 : earep.tail.back()},
      {"primal_complete", erep.complete},
      {"adjoint_complete", earep.complete}};
  {
    ordered_json jb = ordered_json::array();
    for (const auto& br : breps)
      jb.push_back({{"N", br.N},
                    {"gram_cond", br.gram_cond},
                    {"biorth_max_err", br.biorth_max_err},
                    {"bessel_const", br.bessel_const}});
    summary["basis"] = std::move(jb);
  }
  summary["kadec"] = std::move(kadec_json);
  summary["hard_failures"] = hard_failures;
  em.sidecar(std::move(summary));

  if (!hard_failures.empty()) {
    std::string msg = "verify: hard invariant failures:";
    for (const auto& h : hard_failures) msg += "\n  " + h;
    return {1, em.artifacts, msg};
  }
  return {0, em.artifacts, ""};
}

RunResult run_gauge(Emitter& em) {
  const RunConfig& cfg = em.cfg;
  const GridPtr grid = cfg.make_grid();
  const NormalizedPotential np = normalize_trace(cfg.Q);
  const SpectralProblem orig(cfg.Q, cfg.bc, grid, cfg.solve);
  const SpectralProblem norm(np.Q, cfg.bc, grid, cfg.solve);

  const auto p_orig = localize(orig, cfg.n_min, cfg.n_max, cfg.localize);
  const auto p_norm = localize(norm, cfg.n_min, cfg.n_max, cfg.localize);

  CsvFile csv(em.csv_path(em.sub),
              {"n[index]", "re_lambda[1]", "im_lambda[1]",
               "re_lambda_norm_shifted[1]", "im_lambda_norm_shifted[1]",
               "abs_diff[1]"});
  double max_diff = 0.0;
  const size_t rows = std::min(p_orig.size(), p_norm.size());
  for (size_t i = 0; i < rows; ++i) {
    const Cx shifted = p_norm[i].lambda + np.shift;
    const double d = std::abs(p_orig[i].lambda - shifted);
    max_diff = std::max(max_diff, d);
    csv.write_row({fmt(p_orig[i].n), fmt(p_orig[i].lambda.real()),
                   fmt(p_orig[i].lambda.imag()), fmt(shifted.real()),
                   fmt(shifted.imag()), fmt(d)});
  }

  ordered_json summary;
  summary["shift"] = cx_json(np.shift);
  summary["max_abs_diff"] = max_diff;
  summary["phi_end"] = cx_json(np.phi(PI));
  em.sidecar(std::move(summary));

  if (max_diff > 1e-6)
    return {1, em.artifacts,
            "gauge: spectra differ by " + fmt(max_diff) +
                " after removing the computed shift"};
  return {0, em.artifacts, ""};
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {
      "classify", "spectrum0", "fundsys", "pruefer",
      "spectrum", "green0",    "verify",  "gauge"};
  return names;
}

RunResult run_command(const std::string& subcommand, const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory: " + cfg.out_dir + " (" +
                      ec.message() + ")");

  Emitter em{cfg, subcommand, {}};
  if (subcommand == "classify") return run_classify(em);
  if (subcommand == "spectrum0") return run_spectrum0(em);
  if (subcommand == "fundsys") return run_fundsys(em);
  if (subcommand == "pruefer") return run_pruefer(em);
  if (subcommand == "spectrum") return run_spectrum(em);
  if (subcommand == "green0") return run_green0(em);
  if (subcommand == "verify") return run_verify(em);
  if (subcommand == "gauge") return run_gauge(em);
  throw ConfigError("unknown subcommand: " + subcommand);
}

}  // namespace dirac
