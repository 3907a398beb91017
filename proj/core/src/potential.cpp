#include "diracspec/potential.hpp"

#include <algorithm>
#include <cmath>

#include "diracspec/expr.hpp"

namespace dirac {
namespace {

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int GL8_N = 8;
constexpr double GL8_X[GL8_N] = {
    -0.96028985649753623, -0.79666647741362674, -0.52553240991632899,
    -0.18343464249564980, 0.18343464249564980,  0.52553240991632899,
    0.79666647741362674,  0.96028985649753623};
constexpr double GL8_W[GL8_N] = {
    0.10122853629037626, 0.22238103445337447, 0.31370664587788729,
    0.36268378337836198, 0.36268378337836198, 0.31370664587788729,
    0.22238103445337447, 0.10122853629037626};

template <typename F>
Cx gl8(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Cx acc{};
  for (int i = 0; i < GL8_N; ++i) acc += GL8_W[i] * f(mid + half * GL8_X[i]);
  return acc * half;
}

template <typename F>
Cx adaptive(const F& f, double a, double b, double tol, int depth) {
  const Cx whole = gl8(f, a, b);
  const double mid = 0.5 * (a + b);
  const Cx split = gl8(f, a, mid) + gl8(f, mid, b);
  if (std::abs(whole - split) <= tol * std::max(1.0, std::abs(split)) ||
      depth >= 48 || (b - a) < 1e-14) {
    return split;
  }
  return adaptive(f, a, mid, tol, depth + 1) +
         adaptive(f, mid, b, tol, depth + 1);
}

// Integrate with geometric grading toward endpoints listed as singular and
// hard splits at interior breakpoints.
template <typename F>
Cx integrate_graded(const F& f, double a, double b, double tol,
                    std::span<const double> singular,
                    std::span<const double> breakpoints) {
  std::vector<double> cuts = {a, b};
  for (double c : breakpoints)
    if (c > a + 1e-13 && c < b - 1e-13) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  auto is_singular = [&](double x) {
    for (double s : singular)
      if (std::abs(s - x) < 1e-12) return true;
    return false;
  };
  Cx total{};
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    const bool sing_lo = is_singular(lo), sing_hi = is_singular(hi);
    if (!sing_lo && !sing_hi) {
      total += adaptive(f, lo, hi, tol, 0);
      continue;
    }
    // Geometric subdivision: interval widths shrink by 2 toward the singular
    // end; 46 levels reach width ~1e-14 of the span.
    const int levels = 46;
    if (sing_lo) {
      double w = hi - lo;
      double right = hi;
      for (int k = 0; k < levels; ++k) {
        const double left = lo + w * std::pow(0.5, k + 1);
        total += adaptive(f, left, right, tol, 0);
        right = left;
      }
    } else {
      double w = hi - lo;
      double left = lo;
      for (int k = 0; k < levels; ++k) {
        const double right = hi - w * std::pow(0.5, k + 1);
        total += adaptive(f, left, right, tol, 0);
        left = right;
      }
    }
  }
  return total;
}

}  // namespace

ScalarCoef ScalarCoef::expression(const std::string& src) {
  ScalarCoef c;
  c.kind_ = Kind::Fn;
  c.fn_ = parse_expr(src);
  c.source_ = src;
  return c;
}

ScalarCoef ScalarCoef::function(std::function<Cx(double)> f) {
  ScalarCoef c;
  c.kind_ = Kind::Fn;
  c.fn_ = std::move(f);
  return c;
}

ScalarCoef ScalarCoef::samples(std::vector<double> x, std::vector<Cx> v) {
  if (x.size() != v.size() || x.size() < 2)
    throw ConfigError("coefficient samples: need matching x/value arrays of length >= 2");
  if (!std::is_sorted(x.begin(), x.end()))
    throw ConfigError("coefficient samples: x array must be increasing");
  ScalarCoef c;
  c.kind_ = Kind::Samples;
  c.sx_ = std::move(x);
  c.sv_ = std::move(v);
  return c;
}

Cx ScalarCoef::operator()(double x) const {
  switch (kind_) {
    case Kind::Zero:
      return Cx{};
    case Kind::Fn:
      return fn_(x);
    case Kind::Samples: {
      if (x <= sx_.front()) return sv_.front();
      if (x >= sx_.back()) return sv_.back();
      const auto it = std::upper_bound(sx_.begin(), sx_.end(), x);
      const size_t j = static_cast<size_t>(it - sx_.begin());
      const double t = (x - sx_[j - 1]) / (sx_[j] - sx_[j - 1]);
      return sv_[j - 1] * (1.0 - t) + sv_[j] * t;
    }
  }
  return Cx{};
}

Potential Potential::adjoint() const {
  Potential a;
  auto conj_coef = [](const ScalarCoef& c) {
    if (c.is_zero()) return ScalarCoef::zero();
    return ScalarCoef::function([c](double x) { return std::conj(c(x)); });
  };
  a.q1 = conj_coef(q1);
  a.q2 = conj_coef(q3);  // adjoint potential is the conjugate transpose
  a.q3 = conj_coef(q2);
  a.q4 = conj_coef(q4);
  a.p = p;
  a.R_bound = R_bound;
  a.breakpoints = breakpoints;
  a.singular_points = singular_points;
  return a;
}

double Potential::effective_R() const {
  if (R_bound) return *R_bound;
  // The polar-representation coefficients are (q1 - q4)/2 and (q2 + q3)/2;
  // the ball radius bounds both of them.
  ScalarCoef half_diff = ScalarCoef::function(
      [a = q1, b = q4](double x) { return 0.5 * (a(x) - b(x)); });
  const double n1 = coef_lp_norm(half_diff, p, singular_points, breakpoints);
  ScalarCoef half_sum = ScalarCoef::function(
      [a = q2, b = q3](double x) { return 0.5 * (a(x) + b(x)); });
  const double n2 = coef_lp_norm(half_sum, p, singular_points, breakpoints);
  return std::max(n1, n2);
}

SampledPotential sample(const Potential& Q, const GridPtr& grid) {
  SampledPotential sp;
  sp.grid = grid;
  const int n = grid->n_nodes();
  sp.q1.resize(n);
  sp.q2.resize(n);
  sp.q3.resize(n);
  sp.q4.resize(n);
  sp.sum23.resize(n);
  sp.diff23.resize(n);
  sp.halfc.resize(n);
  std::vector<Cx> sum14(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    sp.q1[i] = Q.q1(x);
    sp.q2[i] = Q.q2(x);
    sp.q3[i] = Q.q3(x);
    sp.q4[i] = Q.q4(x);
    sp.sum23[i] = sp.q2[i] + sp.q3[i];
    sp.diff23[i] = sp.q2[i] - sp.q3[i];
    sp.halfc[i] = 0.5 * (sp.q1[i] - sp.q4[i]);
    sum14[i] = sp.q1[i] + sp.q4[i];
  }
  const auto prefix = grid->integrate_prefix(sp.diff23);
  const auto pre14 = grid->integrate_prefix(sum14);
  sp.weight.resize(n);
  sp.drift.resize(n);
  for (int i = 0; i < n; ++i) {
    sp.weight[i] = std::exp(0.5 * prefix[i]);
    sp.drift[i] = -0.5 * pre14[i];
  }
  return sp;
}

double coef_lp_norm(const ScalarCoef& f, double p,
                    std::span<const double> singular,
                    std::span<const double> breakpoints) {
  if (f.is_zero()) return 0.0;
  if (std::isinf(p)) {
    double m = 0.0;
    const int N = 16384;
    for (int i = 0; i <= N; ++i) {
      const double x = PI * i / N;
      bool skip = false;
      for (double s : singular)
        if (std::abs(x - s) < 1e-9) skip = true;
      if (!skip) m = std::max(m, std::abs(f(x)));
    }
    return m;
  }
  auto integrand = [&f, p](double x) {
    return Cx(std::pow(std::abs(f(x)), p), 0.0);
  };
  const Cx I = integrate_graded(integrand, 0.0, PI, 1e-11, singular, breakpoints);
  return std::pow(std::max(0.0, I.real()), 1.0 / p);
}

Cx coef_integral(const ScalarCoef& f, double a, double b, double rel_tol,
                 std::span<const double> singular,
                 std::span<const double> breakpoints) {
  if (f.is_zero()) return Cx{};
  auto fn = [&f](double x) { return f(x); };
  return integrate_graded(fn, a, b, rel_tol, singular, breakpoints);
}

Cx weight_end(const Potential& Q) {
  ScalarCoef diff = ScalarCoef::function(
      [a = Q.q2, b = Q.q3](double x) { return a(x) - b(x); });
  if (Q.q2.is_zero() && Q.q3.is_zero()) return Cx(1.0, 0.0);
  return std::exp(0.5 * coef_integral(diff, 0.0, PI, 1e-12, Q.singular_points,
                                      Q.breakpoints));
}

namespace {

// Common core: H^{-1} Q H + diag(x) I with rotation angle phi.
Potential gauge_core(const Potential& Q, std::function<Cx(double)> phi,
                     std::function<Cx(double)> diag) {
  Potential out;
  auto entry = [Q, phi, diag](int which) {
    return ScalarCoef::function([Q, phi, diag, which](double x) -> Cx {
      const Cx c = std::cos(phi(x)), s = std::sin(phi(x));
      const Cx a = Q.q1(x), b = Q.q2(x), g = Q.q3(x), d = Q.q4(x);
      const Cx cc = c * c, ss = s * s, sc = s * c;
      switch (which) {
        case 1: return a * cc - (b + g) * sc + d * ss + (diag ? diag(x) : Cx{});
        case 2: return b * cc + (a - d) * sc - g * ss;
        case 3: return g * cc + (a - d) * sc - b * ss;
        default: return d * cc + (b + g) * sc + a * ss + (diag ? diag(x) : Cx{});
      }
    });
  };
  out.q1 = entry(1);
  out.q2 = entry(2);
  out.q3 = entry(3);
  out.q4 = entry(4);
  out.p = Q.p;
  out.breakpoints = Q.breakpoints;
  out.singular_points = Q.singular_points;
  return out;
}

}  // namespace

Potential gauge_transform(const Potential& Q, std::function<Cx(double)> phi,
                          std::function<Cx(double)> phi_prime) {
  if (!phi_prime) {
    // 4th-order central difference; adequate for smooth gauge angles.
    phi_prime = [phi](double x) {
      const double h = 1e-5;
      return (8.0 * (phi(x + h) - phi(x - h)) - (phi(x + 2 * h) - phi(x - 2 * h))) /
             (12.0 * h);
    };
  }
  return gauge_core(Q, std::move(phi), std::move(phi_prime));
}

NormalizedPotential normalize_trace(const Potential& Q) {
  NormalizedPotential out;
  if (Q.is_zero() || (Q.q1.is_zero() && Q.q4.is_zero())) {
    out.Q = Q;
    out.shift = Cx{};
    out.phi = [](double) { return Cx{}; };
    return out;
  }
  ScalarCoef tr = ScalarCoef::function(
      [a = Q.q1, d = Q.q4](double x) { return a(x) + d(x); });
  const Cx shift =
      coef_integral(tr, 0.0, PI, 1e-12, Q.singular_points, Q.breakpoints) /
      (2.0 * PI);

  // phi(x) = shift*x - (1/2) int_0^x tr; tabulate the prefix integral once.
  auto fine = Grid::make(2048, Q.breakpoints);
  std::vector<Cx> tr_nodes(fine->n_nodes());
  for (int i = 0; i < fine->n_nodes(); ++i) tr_nodes[i] = tr(fine->node(i));
  auto prefix = std::make_shared<std::vector<Cx>>(fine->integrate_prefix(tr_nodes));
  auto phi = [fine, prefix, shift](double x) -> Cx {
    return shift * x - 0.5 * fine->eval(*prefix, x);
  };
  // Diagonal addition phi' - shift = -(1/2) tr makes the result traceless.
  auto diag = [tr](double x) { return -0.5 * tr(x); };
  out.Q = gauge_core(Q, phi, diag);
  out.Q.p = Q.p;
  out.shift = shift;
  out.phi = phi;
  return out;
}

}  // namespace dirac
