#include "diracspec/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "diracspec/boundary.hpp"
#include "diracspec/oscillatory.hpp"
#include "diracspec/rng.hpp"
#include "diracspec/solutions.hpp"

namespace dirac {
namespace {

double coef_norm2(const Vec2& v) {
  return std::hypot(std::abs(v.a), std::abs(v.b));
}

// Cumulative l^{p'} partial sums (running max when p' = inf).
std::vector<double> cumulative_lp(const std::vector<double>& x, double pp) {
  std::vector<double> out(x.size());
  if (pp > 1e11) {
    double m = 0.0;
    for (size_t i = 0; i < x.size(); ++i) out[i] = m = std::max(m, x[i]);
  } else {
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      acc += std::pow(x[i], pp);
      out[i] = std::pow(acc, 1.0 / pp);
    }
  }
  return out;
}

// Index order used for tail sums: by |n|, ties negative first.
bool abs_order(long a, long b) {
  const long aa = std::labs(a), bb = std::labs(b);
  if (aa != bb) return aa < bb;
  return a < b;
}

// Random probe functions shared by the basis and Bessel diagnostics: complex
// trigonometric polynomials of degree <= deg, and piecewise-constant
// functions with two interior jumps.
std::vector<Cx> trig_probe(const Grid& grid, Rng& rng, int deg) {
  std::vector<Cx> coef_c, coef_s;
  for (int k = 0; k <= deg; ++k) {
    coef_c.push_back(rng.complex_in_disk() / (1.0 + 0.2 * k));
    coef_s.push_back(rng.complex_in_disk() / (1.0 + 0.2 * k));
  }
  std::vector<Cx> v(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double x = grid.node(i);
    Cx acc{};
    for (int k = 0; k <= deg; ++k)
      acc += coef_c[k] * std::cos(k * x) + coef_s[k] * std::sin(k * x);
    v[i] = acc;
  }
  return v;
}

std::vector<Cx> step_probe(const Grid& grid, Rng& rng) {
  double t1 = rng.uniform(0.1, PI - 0.1);
  double t2 = rng.uniform(0.1, PI - 0.1);
  if (t2 < t1) std::swap(t1, t2);
  const Cx v1 = rng.complex_in_disk(), v2 = rng.complex_in_disk(),
           v3 = rng.complex_in_disk();
  std::vector<Cx> v(grid.n_nodes());
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double x = grid.node(i);
    v[i] = x < t1 ? v1 : (x < t2 ? v2 : v3);
  }
  return v;
}

}  // namespace

AsymptoticsReport asymptotics_report(const SpectralProblem& p, long n_min,
                                     long n_max,
                                     const AsymptoticsOptions& opts) {
  AsymptoticsReport out;
  out.epsilon = opts.epsilon;
  out.two_simple_series =
      p.classification().kind == BoundaryClass::StronglyRegular;
  const double e = out.two_simple_series ? 1.0 : 2.0;
  out.p_conj = p.Q().conjugate_index();

  const auto points = localize(p, n_min, n_max, opts.localize);

  // Remainder functionals act on the trace-normalized potential; the
  // comparison points already carry the trace shift.
  const NormalizedPotential np = normalize_trace(p.Q());
  GridPtr pgrid = opts.profile_grid;
  if (!pgrid) pgrid = Grid::make(512, p.Q().breakpoints);
  const SampledPotential spn = sample(np.Q, pgrid);
  const double R = np.Q.effective_R();
  const Cx shift = p.shift();

  // Disk sample layout: center, three interior rings, boundary ring.
  struct DiskSample {
    double radius_frac;
    double angle;
  };
  std::vector<DiskSample> layout;
  layout.push_back({0.0, 0.0});
  const int ring_counts[3] = {5, 5, 6};
  const double ring_fracs[3] = {0.25, 0.5, 0.75};
  for (int r = 0; r < 3; ++r)
    for (int j = 0; j < ring_counts[r]; ++j)
      layout.push_back({ring_fracs[r], 2.0 * PI * j / ring_counts[r] + 0.37 * r});
  const int n_boundary = 48;
  for (int j = 0; j < n_boundary; ++j)
    layout.push_back({1.0, 2.0 * PI * j / n_boundary});

  const double table_fracs[5] = {0.0, 0.25, 0.5, 0.75, 1.0};

  struct RowWork {
    AsymptoticsRow row;
    double table[5];  // monotone surrogate s(r) on the sampled radii
  };
  std::vector<RowWork> work;

  for (const auto& pt : points) {
    RowWork w{};
    w.row.n = pt.n;
    w.row.lambda = pt.lambda;
    w.row.anchor = pt.anchor;
    w.row.dev = std::abs(pt.lambda - pt.anchor);

    const Cx center = pt.anchor - shift;
    for (double& t : w.table) t = 0.0;
    double c1 = 1e300, c2 = 1e300;
    for (const auto& dsm : layout) {
      const double rr = dsm.radius_frac * opts.epsilon;
      const Cx z = center + rr * Cx(std::cos(dsm.angle), std::sin(dsm.angle));
      const double alpha =
          std::max(opts.alpha, std::abs(z.imag()) + 1e-9);
      const RemainderProfile prof =
          remainder_profile(spn, R, out.p_conj, alpha, z);
      const double val = prof.Ups.v.back().real() + prof.Ups_pprime;
      for (int k = 0; k < 5; ++k)
        if (dsm.radius_frac <= table_fracs[k] + 1e-12)
          w.table[k] = std::max(w.table[k], val);
      if (dsm.radius_frac == 1.0) {
        const double d0 = std::abs(p.char_det0(pt.anchor + (z - center)));
        c1 = std::min(c1, d0 / opts.epsilon);
        c2 = std::min(c2, d0 / (opts.epsilon * opts.epsilon));
      }
    }
    w.row.s_eps = w.table[4];
    w.row.c1 = c1;
    w.row.c2 = c2;
    work.push_back(w);
  }

  // Global determinant constant and the single fitted bound constant.
  double c_global = 1e300;
  for (const auto& w : work)
    c_global = std::min(c_global, out.two_simple_series ? w.row.c1 : w.row.c2);
  if (work.empty()) c_global = 0.0;
  out.c_global = c_global;

  double M = 0.0;
  for (const auto& w : work)
    if (w.row.s_eps > 1e-300)
      M = std::max(M, std::pow(w.row.dev, e) * c_global / w.row.s_eps);
  out.fitted_M = M;

  for (auto& w : work) {
    if (M <= 0.0 || w.row.s_eps <= 1e-300) {
      w.row.r_n = 0.0;
      w.row.resolved = (w.row.s_eps <= 1e-300);
    } else {
      w.row.resolved = false;
      for (int k = 0; k < 5; ++k) {
        const double r = table_fracs[k] * opts.epsilon;
        if (c_global * r / M >= w.table[k]) {
          w.row.r_n = r;
          w.row.resolved = true;
          break;
        }
      }
      if (!w.row.resolved) w.row.r_n = opts.epsilon;
    }
    // Small floor absorbs the root-refinement noise at exactly matching
    // comparison points.
    w.row.inequality_ok =
        std::pow(w.row.dev, e) <= w.row.r_n + 1e-9;
    out.rows.push_back(w.row);
  }

  std::sort(out.rows.begin(), out.rows.end(),
            [](const AsymptoticsRow& a, const AsymptoticsRow& b) {
              return a.n < b.n;
            });

  std::vector<AsymptoticsRow> by_abs = out.rows;
  std::sort(by_abs.begin(), by_abs.end(),
            [](const AsymptoticsRow& a, const AsymptoticsRow& b) {
              return abs_order(a.n, b.n);
            });
  std::vector<double> s_seq, dev_seq;
  for (const auto& r : by_abs) {
    s_seq.push_back(r.s_eps);
    dev_seq.push_back(r.dev);
  }
  out.tail_s = cumulative_lp(s_seq, out.p_conj);
  out.tail_dev = cumulative_lp(dev_seq, out.p_conj);
  return out;
}

EigenfunctionReport eigenfunction_asymptotics(
    const SpectralProblem& p, std::span<const SpectralPoint> points,
    double model_prefactor) {
  EigenfunctionReport out;
  out.p_conj = p.Q().conjugate_index();
  const auto& weight = p.sampled().weight;
  const GridPtr& grid = p.grid();

  for (const auto& pt : points) {
    EigenfunctionRow row;
    row.n = pt.n;
    row.lambda = pt.lambda;
    if (pt.multiplicity > 1) {
      row.skipped = true;
      out.complete = false;
      out.rows.push_back(row);
      continue;
    }
    const auto pairs = eigenfunctions(p, pt.lambda);
    const Eigenpair& ep = pairs.front();
    const UnperturbedEigen ue =
        unperturbed_eigenfunction(p.assoc_form(), pt.anchor - p.shift(), grid);
    if (ue.geometric_multiplicity != 1) {
      row.skipped = true;
      out.complete = false;
      out.rows.push_back(row);
      continue;
    }

    // Weighted unperturbed model m = prefactor W R(d) y0, where the secular
    // phase d(x) = -(1/2) int_0^x (q1 + q4) rotates the unperturbed profile
    // pointwise (R(0) = I for potentials with q4 = -q1).
    const auto& drift = p.sampled().drift;
    GridFn2 m(grid);
    for (int i = 0; i < grid->n_nodes(); ++i) {
      const Cx cd = std::cos(drift[i]), sd = std::sin(drift[i]);
      const Cx u = ue.y.a[i], v = ue.y.b[i];
      m.a[i] = model_prefactor * weight[i] * (cd * u + sd * v);
      m.b[i] = model_prefactor * weight[i] * (cd * v - sd * u);
    }

    // Match the coefficient scale, then align the phase by projection.
    const double tau = coef_norm2(ue.gamma) / coef_norm2(ep.gamma);
    GridFn2 yt(grid);
    for (int i = 0; i < grid->n_nodes(); ++i) {
      yt.a[i] = tau * ep.y.a[i];
      yt.b[i] = tau * ep.y.b[i];
    }
    const Cx inner = inner_product(yt, m);
    const double mn = lp_norm(m, 2.0);
    row.align = std::abs(inner) / std::max(tau * mn, 1e-300);
    const Cx sigma =
        std::abs(inner) > 1e-300 ? std::conj(inner) / std::abs(inner) : Cx(1.0);

    GridFn2 diff(grid);
    for (int i = 0; i < grid->n_nodes(); ++i) {
      diff.a[i] = sigma * yt.a[i] - m.a[i];
      diff.b[i] = sigma * yt.b[i] - m.b[i];
    }
    row.b_n = lp_norm(diff, out.p_conj);
    out.rows.push_back(row);
  }

  std::sort(out.rows.begin(), out.rows.end(),
            [](const EigenfunctionRow& a, const EigenfunctionRow& b) {
              return a.n < b.n;
            });
  std::vector<EigenfunctionRow> by_abs = out.rows;
  std::sort(by_abs.begin(), by_abs.end(),
            [](const EigenfunctionRow& a, const EigenfunctionRow& b) {
              return abs_order(a.n, b.n);
            });
  std::vector<double> seq;
  for (const auto& r : by_abs)
    if (!r.skipped) seq.push_back(r.b_n);
  out.tail = cumulative_lp(seq, out.p_conj);
  return out;
}

BasisReport basis_report(const SpectralProblem& p, int N,
                         const BasisOptions& opts) {
  BasisReport out;
  out.N = N;
  out.bracket_mode = opts.bracket;

  const auto points = localize(p, -long(N), long(N), opts.localize);
  const SpectralProblem ap = adjoint_problem(p);
  const auto apoints = localize(ap, -long(N), long(N), opts.localize);

  // Collect one eigenfunction per localized point, deduplicating exactly
  // coinciding zeros (a numerically double eigenvalue yields either a
  // two-dimensional eigenspace or, with a Jordan chain, a single function).
  struct Entry {
    Cx lambda;
    Cx anchor;
    GridFn2 y;
  };
  auto collect = [&](const SpectralProblem& prob,
                     const std::vector<SpectralPoint>& pts,
                     bool& complete) {
    std::vector<Entry> entries;
    for (size_t i = 0; i < pts.size(); ++i) {
      bool dup = false;
      for (size_t j = 0; j < i; ++j)
        if (std::abs(pts[i].lambda - pts[j].lambda) <
            1e-9 * (1.0 + std::abs(pts[i].lambda)))
          dup = true;
      if (dup) continue;
      auto eps = eigenfunctions(prob, pts[i].lambda);
      // How many points share this zero?
      int sharers = 0;
      for (const auto& q : pts)
        if (std::abs(q.lambda - pts[i].lambda) <
            1e-9 * (1.0 + std::abs(pts[i].lambda)))
          ++sharers;
      if (int(eps.size()) < sharers) complete = false;
      for (int k = 0; k < std::min<int>(sharers, int(eps.size())); ++k)
        entries.push_back({pts[i].lambda, pts[i].anchor, std::move(eps[k].y)});
    }
    return entries;
  };
  std::vector<Entry> ys = collect(p, points, out.complete);
  std::vector<Entry> zs = collect(ap, apoints, out.complete);
  out.count = static_cast<int>(ys.size());
  if (ys.empty()) return out;

  // Bracket mode: orthonormalize within coinciding-anchor clusters.
  if (opts.bracket) {
    std::vector<bool> used(ys.size(), false);
    for (size_t i = 0; i < ys.size(); ++i) {
      if (used[i]) continue;
      std::vector<size_t> cluster{i};
      used[i] = true;
      for (size_t j = i + 1; j < ys.size(); ++j)
        if (!used[j] && std::abs(ys[j].anchor - ys[i].anchor) < 1e-9) {
          cluster.push_back(j);
          used[j] = true;
        }
      for (size_t a = 0; a < cluster.size(); ++a) {
        GridFn2& v = ys[cluster[a]].y;
        for (size_t b = 0; b < a; ++b) {
          const GridFn2& u = ys[cluster[b]].y;
          const Cx c = inner_product(v, u);
          for (size_t k = 0; k < v.a.size(); ++k) {
            v.a[k] -= c * u.a[k];
            v.b[k] -= c * u.b[k];
          }
        }
        const double nn = lp_norm(v, 2.0);
        if (nn > 1e-300)
          for (size_t k = 0; k < v.a.size(); ++k) {
            v.a[k] /= nn;
            v.b[k] /= nn;
          }
      }
    }
  }

  const int n = static_cast<int>(ys.size());
  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const Cx g = inner_product(ys[i].y, ys[j].y);
      G(i, j) = g;
      G(j, i) = std::conj(g);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  out.gram_cond = emin > 1e-300 ? emax / emin : 1e300;

  // Pair each adjoint function with the conjugate eigenvalue.
  double biorth = 0.0, amin = 1e300, amax = 0.0;
  if (!zs.empty()) {
    std::vector<int> pair_of(n, -1);
    for (int i = 0; i < n; ++i) {
      double best = 1e300;
      for (size_t j = 0; j < zs.size(); ++j) {
        const double d = std::abs(zs[j].lambda - std::conj(ys[i].lambda));
        if (d < best) {
          best = d;
          pair_of[i] = static_cast<int>(j);
        }
      }
    }
    std::vector<Cx> alpha(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = inner_product(ys[i].y, zs[pair_of[i]].y);
      amin = std::min(amin, std::abs(alpha[i]));
      amax = std::max(amax, std::abs(alpha[i]));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Cx v = inner_product(ys[i].y, zs[pair_of[j]].y) /
                     std::max(std::abs(alpha[j]), 1e-300);
        biorth = std::max(biorth, std::abs(v));
      }
  }
  out.biorth_max_err = biorth;
  out.alpha_min = zs.empty() ? 0.0 : amin;
  out.alpha_max = amax;

  // Bessel constant over seeded probes.
  Rng rng(opts.seed);
  const int n_steps = std::min(8, opts.n_probes);
  const int n_trig = std::max(0, opts.n_probes - n_steps);
  double bessel = 0.0;
  for (int pr = 0; pr < opts.n_probes; ++pr) {
    GridFn2 f(p.grid());
    if (pr < n_trig) {
      f.a = trig_probe(*p.grid(), rng, 2 * N);
      f.b = trig_probe(*p.grid(), rng, 2 * N);
    } else {
      f.a = step_probe(*p.grid(), rng);
      f.b = step_probe(*p.grid(), rng);
    }
    const double fn = lp_norm(f, 2.0);
    if (fn < 1e-300) continue;
    double sum = 0.0;
    for (const auto& e : ys) sum += std::norm(inner_product(f, e.y));
    bessel = std::max(bessel, sum / (fn * fn));
  }
  out.bessel_const = bessel;
  return out;
}

KadecCheck bessel_kadec_check(std::span<const long> ns,
                              std::span<const Cx> lambdas, double p,
                              int n_probes, std::uint64_t seed,
                              const GridPtr& grid) {
  if (ns.size() != lambdas.size())
    throw ConfigError("bessel_kadec_check: index and value lists differ in size");
  if (!(p >= 1.0) || p > 2.0 + 1e-12)
    throw ConfigError("bessel_kadec_check: p must lie in [1, 2]");
  KadecCheck out;
  out.bound = 1.0 / (2.0 * p);
  long max_abs_n = 1;
  for (size_t j = 0; j < ns.size(); ++j) {
    const double d = std::abs(lambdas[j] - Cx(2.0 * double(ns[j]), 0.0));
    out.sup_deviation = std::max(out.sup_deviation, d);
    max_abs_n = std::max(max_abs_n, std::labs(ns[j]));
    if (d >= out.bound)
      throw DomainError(
          "bessel_kadec_check: |lambda - 2n| = " + std::to_string(d) +
          " >= 1/(2p) = " + std::to_string(out.bound) +
          " at n = " + std::to_string(ns[j]));
  }
  const double pp = p / (p - 1.0);

  Rng rng(seed);
  const int n_steps = std::min(8, n_probes);
  const int n_trig = std::max(0, n_probes - n_steps);
  const int deg = static_cast<int>(std::min<long>(2 * max_abs_n, 64));
  for (int pr = 0; pr < n_probes; ++pr) {
    std::vector<Cx> f = pr < n_trig ? trig_probe(*grid, rng, deg)
                                    : step_probe(*grid, rng);
    GridFn1 ff(grid);
    ff.v = f;
    const double fn = lp_norm(ff, p);
    if (fn < 1e-300) {
      out.per_probe.push_back(0.0);
      continue;
    }
    double acc = 0.0, mx = 0.0;
    for (const Cx& lam : lambdas) {
      const Cx I = osc_prefix(*grid, f, lam).back();
      acc += std::pow(std::abs(I), pp);
      mx = std::max(mx, std::abs(I));
    }
    const double num = pp > 1e11 ? mx : std::pow(acc, 1.0 / pp);
    out.per_probe.push_back(num / fn);
    out.constant = std::max(out.constant, num / fn);
  }
  return out;
}

}  // namespace dirac
