#include "diracspec/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

namespace dirac {
namespace {

// In-place radix-2 FFT (size must be a power of two). Forward analysis uses
// e^{-2 pi i k l / n}, so index k carries the coefficient of the mode
// e^{+i k theta} once k is folded to (-n/2, n/2].
void fft(std::vector<Cx>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * PI / double(len) * (inverse ? 1.0 : -1.0);
    const Cx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      Cx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const Cx u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= double(n);
}

// Spectral derivative d/dtheta of periodic samples.
std::vector<Cx> spectral_derivative(const std::vector<Cx>& samples) {
  std::vector<Cx> a = samples;
  const size_t n = a.size();
  fft(a, false);
  for (size_t k = 0; k < n; ++k) {
    const long kk = (k <= n / 2) ? long(k) : long(k) - long(n);
    if (size_t(2 * std::abs(kk)) == n) {
      a[k] = Cx{};  // drop the Nyquist mode
    } else {
      a[k] *= Cx(0.0, double(kk));
    }
  }
  fft(a, true);
  return a;
}

struct Contour {
  std::vector<Cx> lambda;   // sample points
  std::vector<Cx> value;    // determinant there
  double max_abs = 0.0;
  double min_abs = 0.0;
  double winding = 0.0;     // total arg increment / 2 pi
};

double unwrap_winding(const std::vector<Cx>& v) {
  double total = 0.0;
  const size_t n = v.size();
  for (size_t j = 0; j < n; ++j) {
    const Cx r = v[(j + 1) % n] / v[j];
    total += std::arg(r);
  }
  return total / (2.0 * PI);
}

}  // namespace

SpectralProblem::SpectralProblem(Potential Q, BoundaryForm bc, GridPtr grid,
                                 SolveOptions solve)
    : Q_(std::move(Q)),
      bc_(bc),
      grid_(std::move(grid)),
      solve_(solve),
      sampled_(sample(Q_, grid_)),
      solver_(Q_) {
  W_end_ = weight_end(Q_);
  if (Q_.q1.is_zero() && Q_.q4.is_zero()) {
    shift_ = Cx{};
  } else {
    ScalarCoef tr = ScalarCoef::function(
        [a = Q_.q1, d = Q_.q4](double x) { return a(x) + d(x); });
    shift_ = coef_integral(tr, 0.0, PI, 1e-12, Q_.singular_points,
                           Q_.breakpoints) /
             (2.0 * PI);
  }
  assoc_ = associated_form(bc_, W_end_);
  cls_ = classify(bc_, W_end_);
  spec0_ = unperturbed_spectrum(bc_, W_end_);
}

Cx SpectralProblem::char_det(Cx lambda, double tol) const {
  const Mat2 Y = solver_.end_matrix(lambda, tol);
  // Columns of Y are c(pi), s(pi); c(0) = (1,0), s(0) = (0,1).
  Mat2 M;
  M.m11 = bc_.A.m11 + bc_.B.m11 * Y.m11 + bc_.B.m12 * Y.m21;
  M.m12 = bc_.A.m12 + bc_.B.m11 * Y.m12 + bc_.B.m12 * Y.m22;
  M.m21 = bc_.A.m21 + bc_.B.m21 * Y.m11 + bc_.B.m22 * Y.m21;
  M.m22 = bc_.A.m22 + bc_.B.m21 * Y.m12 + bc_.B.m22 * Y.m22;
  return M.det();
}

Cx SpectralProblem::char_det0(Cx lambda) const {
  return delta0(bc_, W_end_, lambda - shift_);
}

Cx SpectralProblem::anchor(long n) const { return shift_ + spec0_.lambda0(n); }

int SpectralProblem::anchor_multiplicity(long n) const {
  return spec0_.multiplicity(n);
}

SpectralProblem adjoint_problem(const SpectralProblem& p) {
  return SpectralProblem(p.Q().adjoint(), adjoint_boundary_form(p.bc()),
                         p.grid(), p.solve_options());
}

namespace {

Contour sample_circle(const SpectralProblem& p, Cx center, double radius,
                      int m, double ode_tol) {
  Contour c;
  c.lambda.resize(m);
  c.value.resize(m);
  c.max_abs = 0.0;
  c.min_abs = 1e300;
  for (int j = 0; j < m; ++j) {
    const double th = 2.0 * PI * j / m;
    const Cx z = center + radius * Cx(std::cos(th), std::sin(th));
    const Cx v = p.char_det(z, ode_tol);
    c.lambda[j] = z;
    c.value[j] = v;
    c.max_abs = std::max(c.max_abs, std::abs(v));
    c.min_abs = std::min(c.min_abs, std::abs(v));
  }
  c.winding = unwrap_winding(c.value);
  return c;
}

// Establish an integer winding number on a circle, adapting the sample count
// and nudging the radius when the contour runs too close to a zero.
Contour winding_circle(const SpectralProblem& p, Cx center, double& radius,
                       const LocalizeOptions& opts) {
  const double radius0 = radius;
  for (int nudge = 0; nudge < 5; ++nudge) {
    for (int m = opts.winding_samples; m <= opts.max_winding_samples; m *= 2) {
      Contour c = sample_circle(p, center, radius, m, opts.scan_ode_tol);
      const bool grazing = c.min_abs <= 1e-10 * std::max(c.max_abs, 1e-300);
      const double w = c.winding;
      if (!grazing && std::abs(w - std::lround(w)) <= opts.winding_tol) {
        // Stabilization: the value must persist under doubling.
        Contour c2 =
            sample_circle(p, center, radius, 2 * m, opts.scan_ode_tol);
        if (std::abs(c2.winding - std::lround(c2.winding)) <= opts.winding_tol &&
            std::lround(c2.winding) == std::lround(w))
          return c2;
      }
      if (grazing) break;  // resampling cannot help, move the contour
    }
    radius = radius0 * (1.0 + 0.1 * (nudge + 1) * (nudge % 2 == 0 ? 1.0 : -1.0));
  }
  throw NumericError("localize: no stable integer winding number on the disk");
}

Cx muller_refine(const SpectralProblem& p, Cx start, double scale,
                 Cx center, double radius, const LocalizeOptions& opts,
                 double& resid) {
  auto f = [&](Cx z) { return p.char_det(z, opts.refine_ode_tol); };
  Cx x0 = start + Cx(0.05 * radius, 0.0);
  Cx x1 = start - Cx(0.025 * radius, 0.04 * radius);
  Cx x2 = start;
  Cx f0 = f(x0), f1 = f(x1), f2 = f(x2);
  Cx best = x2;
  double best_abs = std::abs(f2);
  for (int it = 0; it < 60; ++it) {
    const Cx q = (x2 - x1) / ((x1 - x0) + Cx(1e-300, 0.0));
    const Cx A = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
    const Cx B = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
    const Cx C = (1.0 + q) * f2;
    Cx denom = B * B - 4.0 * A * C;
    denom = std::sqrt(denom);
    const Cx d1 = B + denom, d2 = B - denom;
    const Cx den = std::abs(d1) >= std::abs(d2) ? d1 : d2;
    if (std::abs(den) < 1e-300) break;
    const Cx x3 = x2 - (x2 - x1) * (2.0 * C / den);
    const Cx f3 = f(x3);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = f3;
    if (std::abs(f3) < best_abs) {
      best = x3;
      best_abs = std::abs(f3);
    }
    if (std::abs(x3 - center) > 2.0 * radius) break;
    if (best_abs <= opts.refine_tol * scale &&
        std::abs(x2 - x1) <= 1e-12 * (1.0 + std::abs(x2)))
      break;
  }
  resid = best_abs / std::max(scale, 1e-300);
  return best;
}

}  // namespace

std::vector<SpectralPoint> localize(const SpectralProblem& p, long n_min,
                                    long n_max, const LocalizeOptions& opts) {
  if (n_min > n_max) throw ConfigError("localize: n_min > n_max");
  if (p.spec0().kind == SpectrumKind::Empty) return {};
  // Group indices with (numerically) identical anchors.
  std::vector<std::pair<Cx, std::vector<long>>> clusters;
  for (long n = n_min; n <= n_max; ++n) {
    const Cx a = p.anchor(n);
    bool merged = false;
    for (auto& cl : clusters) {
      if (std::abs(cl.first - a) < 1e-9) {
        cl.second.push_back(n);
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back({a, {n}});
  }
  // Cap each disk radius below half the distance to the nearest other
  // cluster so disks separate the spectrum.
  std::vector<SpectralPoint> out;
  for (const auto& cl : clusters) {
    double radius = opts.radius;
    for (const auto& other : clusters) {
      if (&other == &cl) continue;
      radius = std::min(radius, 0.45 * std::abs(other.first - cl.first));
    }
    // The winding around an anchor counts every eigenvalue that lives there,
    // including a double partner whose index falls outside [n_min, n_max].
    const int expected =
        std::max(static_cast<int>(cl.second.size()),
                 p.anchor_multiplicity(cl.second.front()));
    LocalizeOptions local = opts;
    Contour c;
    long w = -1;
    for (int attempt = 0;; ++attempt) {
      double r = radius;
      c = winding_circle(p, cl.first, r, local);
      w = std::lround(c.winding);
      if (w == expected) break;
      if (attempt >= 2)
        throw NumericError(
            "localize: winding count " + std::to_string(w) + " around anchor (" +
            std::to_string(cl.first.real()) + ", " +
            std::to_string(cl.first.imag()) + ") does not match the expected " +
            std::to_string(expected));
      radius *= 1.25;  // eigenvalue may sit just outside; widen and retry
    }

    std::vector<Cx> zeros;
    std::vector<double> resids;
    if (p.Q().is_zero()) {
      // Unperturbed problem: the eigenvalue sits exactly on the anchor; the
      // winding above already verified its multiplicity against the
      // determinant. Extracting a coincident pair from contour moments would
      // only add a sqrt(eps) splitting artifact.
      const double r0 =
          std::abs(p.char_det(cl.first, opts.refine_ode_tol)) /
          std::max(c.max_abs, 1e-300);
      zeros.assign(size_t(expected), cl.first);
      resids.assign(size_t(expected), r0);
    } else if (expected == 1) {
      double resid = 0.0;
      const Cx z = muller_refine(p, cl.first, c.max_abs, cl.first, radius,
                                 opts, resid);
      zeros.push_back(z);
      resids.push_back(resid);
    } else if (expected == 2) {
      // Zero moments from the contour samples: mu_m = (1/2 pi i) sum
      // lambda^m (dDelta/dtheta) / Delta dtheta.
      const auto dv = spectral_derivative(c.value);
      const int m = static_cast<int>(c.value.size());
      Cx mu1{}, mu2{};
      const double dth = 2.0 * PI / m;
      for (int j = 0; j < m; ++j) {
        const Cx term = dv[j] / c.value[j] * dth / Cx(0.0, 2.0 * PI);
        mu1 += c.lambda[j] * term;
        mu2 += c.lambda[j] * c.lambda[j] * term;
      }
      const Cx e1 = mu1, e2 = 0.5 * (mu1 * mu1 - mu2);
      const Cx sq = std::sqrt(e1 * e1 - 4.0 * e2);
      Cx za = 0.5 * (e1 + sq), zb = 0.5 * (e1 - sq);
      if (std::abs(za - zb) > 1e-6 * (1.0 + std::abs(za))) {
        double ra = 0.0, rb = 0.0;
        const Cx pa = muller_refine(p, za, c.max_abs, cl.first, radius, opts, ra);
        const Cx pb = muller_refine(p, zb, c.max_abs, cl.first, radius, opts, rb);
        if (std::abs(pa - pb) > 1e-9 * (1.0 + std::abs(pa))) {
          za = pa;
          zb = pb;
          resids = {ra, rb};
        } else {
          resids = {std::abs(p.char_det(za, opts.refine_ode_tol)) / c.max_abs,
                    std::abs(p.char_det(zb, opts.refine_ode_tol)) / c.max_abs};
        }
      } else {
        const double r0 =
            std::abs(p.char_det(za, opts.refine_ode_tol)) / c.max_abs;
        resids = {r0, r0};
      }
      zeros = {za, zb};
      if (resids.empty())
        resids = {0.0, 0.0};
    } else {
      throw NumericError(
          "localize: disks with multiplicity > 2 are not supported");
    }

    std::sort(zeros.begin(), zeros.end(), [](Cx a, Cx b) {
      if (a.real() != b.real()) return a.real() < b.real();
      return a.imag() < b.imag();
    });
    std::vector<long> ns = cl.second;
    std::sort(ns.begin(), ns.end());
    for (size_t k = 0; k < ns.size(); ++k) {
      SpectralPoint pt;
      pt.n = ns[k];
      pt.lambda = zeros[k];
      pt.anchor = cl.first;
      pt.multiplicity = expected;
      pt.radius = radius;
      pt.winding = c.winding;
      pt.det_residual = resids.size() > k ? resids[k] : resids[0];
      pt.refined = true;
      out.push_back(pt);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SpectralPoint& a, const SpectralPoint& b) { return a.n < b.n; });
  return out;
}

CountCheck global_count_check(const SpectralProblem& p, double re_lo,
                              double re_hi, double im_bound,
                              const LocalizeOptions& opts) {
  if (re_hi <= re_lo) throw ConfigError("global_count_check: empty rectangle");
  CountCheck out;
  out.re_lo = re_lo;
  out.re_hi = re_hi;

  double im = im_bound;
  for (int attempt = 0; attempt < 4; ++attempt) {
    std::vector<Cx> vals;
    const int nh = std::max(256, int(64.0 * (re_hi - re_lo)));
    const int nv = std::max(64, int(64.0 * 2.0 * im));
    auto push_edge = [&](Cx a, Cx b, int steps) {
      for (int j = 0; j < steps; ++j) {
        const Cx z = a + (b - a) * (double(j) / steps);
        vals.push_back(p.char_det(z, opts.scan_ode_tol));
      }
    };
    push_edge(Cx(re_lo, -im), Cx(re_hi, -im), nh);
    push_edge(Cx(re_hi, -im), Cx(re_hi, im), nv);
    push_edge(Cx(re_hi, im), Cx(re_lo, im), nh);
    push_edge(Cx(re_lo, im), Cx(re_lo, -im), nv);
    double mn = 1e300, mx = 0.0;
    for (const Cx& v : vals) {
      mn = std::min(mn, std::abs(v));
      mx = std::max(mx, std::abs(v));
    }
    if (mn <= 1e-8 * mx) {
      im *= 1.1;  // contour grazes a zero; inflate the rectangle
      continue;
    }
    const double w = unwrap_winding(vals);
    if (std::abs(w - std::lround(w)) > opts.winding_tol) {
      im *= 1.1;
      continue;
    }
    out.contour_count = std::lround(w);
    out.min_boundary_det = mn;
    out.im_bound = im;
    long anchors = 0;
    // Anchors inside the rectangle; indices well beyond the box are cheap to
    // enumerate since anchors track n.
    const long lo = std::lround(re_lo) - 4, hi = std::lround(re_hi) + 4;
    for (long n = lo; n <= hi; ++n) {
      Cx a;
      try {
        a = p.anchor(n);
      } catch (const NumericError&) {
        break;  // empty comparison spectrum
      }
      if (a.real() > re_lo && a.real() < re_hi && std::abs(a.imag()) < im)
        ++anchors;
    }
    out.anchor_count = anchors;
    out.consistent = (out.contour_count == anchors);
    return out;
  }
  throw NumericError(
      "global_count_check: could not stabilize the contour count (zero too "
      "close to the rectangle boundary)");
}

std::vector<Eigenpair> eigenfunctions(const SpectralProblem& p, Cx lambda) {
  const FundamentalPair fp = p.solver().dense_pair(lambda, p.grid());
  Mat2 M;
  const BoundaryForm& bc = p.bc();
  M.m11 = bc.A.m11 + bc.B.m11 * fp.end.m11 + bc.B.m12 * fp.end.m21;
  M.m12 = bc.A.m12 + bc.B.m11 * fp.end.m12 + bc.B.m12 * fp.end.m22;
  M.m21 = bc.A.m21 + bc.B.m21 * fp.end.m11 + bc.B.m22 * fp.end.m21;
  M.m22 = bc.A.m22 + bc.B.m21 * fp.end.m12 + bc.B.m22 * fp.end.m22;

  // Scale of the ingredients, for relative rank decisions.
  double bscale = 0.0;
  for (double t : {std::abs(bc.A.m11), std::abs(bc.A.m12), std::abs(bc.A.m21),
                   std::abs(bc.A.m22), std::abs(bc.B.m11), std::abs(bc.B.m12),
                   std::abs(bc.B.m21), std::abs(bc.B.m22)})
    bscale = std::max(bscale, t);
  double yscale = 0.0;
  for (double t : {std::abs(fp.end.m11), std::abs(fp.end.m12),
                   std::abs(fp.end.m21), std::abs(fp.end.m22)})
    yscale = std::max(yscale, t);
  const double scale = std::max(bscale * std::max(1.0, yscale), 1e-300);

  Eigen::Matrix2cd EM;
  EM << M.m11, M.m12, M.m21, M.m22;
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(EM, Eigen::ComputeFullV);
  const double s0 = svd.singularValues()(0), s1 = svd.singularValues()(1);
  if (s1 > 1e-5 * scale)
    throw NumericError(
        "eigenfunctions: boundary matrix is not singular at lambda = (" +
        std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) +
        "); smallest singular value " + std::to_string(s1));

  std::vector<Eigenpair> out;
  const int count = (s0 <= 1e-8 * scale) ? 2 : 1;
  for (int k = 0; k < count; ++k) {
    const auto v = svd.matrixV().col(1 - k);  // smallest singular value first
    Eigenpair ep;
    ep.lambda = lambda;
    ep.gamma = {v(0), v(1)};
    ep.geometric_multiplicity = count;
    GridFn2 y(p.grid());
    for (int i = 0; i < p.grid()->n_nodes(); ++i) {
      y.a[i] = ep.gamma.a * fp.c.a[i] + ep.gamma.b * fp.s.a[i];
      y.b[i] = ep.gamma.a * fp.c.b[i] + ep.gamma.b * fp.s.b[i];
    }
    const double nn = lp_norm(y, 2.0);
    for (auto& vv : y.a) vv /= nn;
    for (auto& vv : y.b) vv /= nn;
    ep.gamma.a /= nn;
    ep.gamma.b /= nn;

    // Equation residual via the per-cell interpolant derivative.
    const auto da = p.grid()->derivative(y.a);
    const auto db = p.grid()->derivative(y.b);
    const auto& sp = p.sampled();
    GridFn1 res(p.grid());
    for (int i = 0; i < p.grid()->n_nodes(); ++i) {
      const Cx r1 = -db[i] + sp.q1[i] * y.a[i] + sp.q2[i] * y.b[i] - lambda * y.a[i];
      const Cx r2 = da[i] + sp.q3[i] * y.a[i] + sp.q4[i] * y.b[i] - lambda * y.b[i];
      res.v[i] = Cx(std::hypot(std::abs(r1), std::abs(r2)), 0.0);
    }
    ep.residual = lp_norm(res, 2.0);

    const Cx u1 = bc.A.m11 * y.a[0] + bc.A.m12 * y.b[0] +
                  bc.B.m11 * y.a.back() + bc.B.m12 * y.b.back();
    const Cx u2 = bc.A.m21 * y.a[0] + bc.A.m22 * y.b[0] +
                  bc.B.m21 * y.a.back() + bc.B.m22 * y.b.back();
    ep.bc_residual = std::max(std::abs(u1), std::abs(u2));
    ep.y = std::move(y);
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace dirac
