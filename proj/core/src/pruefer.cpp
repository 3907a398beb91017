#include <algorithm>
#include <cmath>
#include <string>

#include "diracspec/oscillatory.hpp"
#include "diracspec/solutions.hpp"

namespace dirac {
namespace {

double sup_norm(const std::vector<Cx>& v) {
  double m = 0.0;
  for (const Cx& x : v) m = std::max(m, std::abs(x));
  return m;
}

double seq_lp(const Grid& grid, const std::vector<Cx>& v, double p) {
  if (std::isinf(p)) return sup_norm(v);
  double acc = 0.0;
  for (int i = 0; i < grid.n_nodes(); ++i)
    acc += grid.weight(i) * std::pow(std::abs(v[i]), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

PrueferSolution pruefer_solve(const SampledPotential& sp, double R,
                              double p_conj, double alpha, Cx lambda,
                              PrueferKind kind) {
  const auto grid = sp.grid;
  const int n = grid->n_nodes();

  const RemainderProfile prof = remainder_profile(sp, R, p_conj, alpha, lambda);
  if (!prof.in_domain) {
    std::string msg = "pruefer: lambda = (" + std::to_string(lambda.real()) +
                      ", " + std::to_string(lambda.imag()) +
                      ") outside the validity region: ";
    if (!prof.in_strip) {
      msg += "|Im lambda| = " + std::to_string(std::abs(lambda.imag())) +
             " exceeds alpha = " + std::to_string(alpha);
    } else {
      msg += "sup Ups = " + std::to_string(prof.Ups_sup) +
             " is not below 1/(8 k^4) = " + std::to_string(prof.threshold) +
             " (k = " + std::to_string(prof.k_const) +
             ", R = " + std::to_string(R) + ")";
    }
    throw DomainError(msg);
  }

  // Oscillatory polar coefficients: s-type uses ((q1-q4)/2, (q2+q3)/2);
  // c-type flips both signs. The secular drift -(1/2) int (q1+q4) enters the
  // angle with the same sign for both kinds.
  const double sign = (kind == PrueferKind::SType) ? 1.0 : -1.0;
  std::vector<Cx> qc(n), half23(n);
  for (int i = 0; i < n; ++i) {
    qc[i] = sign * sp.halfc[i];
    half23[i] = sign * 0.5 * sp.sum23[i];
  }

  // F(eta)(x) = drift(x) + int_0^x qc cos(2 lambda t + 2 eta)
  // - half23 sin(...) dt, evaluated through smooth factors against
  // sin/cos(2 lambda t) so the oscillation is handled by the product rule at
  // any lambda.
  auto apply_F = [&](const std::vector<Cx>& eta) {
    std::vector<Cx> gc(n), gs(n);
    for (int i = 0; i < n; ++i) {
      const Cx c2 = std::cos(2.0 * eta[i]), s2 = std::sin(2.0 * eta[i]);
      gc[i] = qc[i] * c2 - half23[i] * s2;
      gs[i] = qc[i] * s2 + half23[i] * c2;
    }
    const auto pc = osc_prefix_sincos(*grid, gc, 2.0 * lambda);
    const auto ps = osc_prefix_sincos(*grid, gs, 2.0 * lambda);
    std::vector<Cx> out(n);
    for (int i = 0; i < n; ++i)
      out[i] = sp.drift[i] + pc.cos_part[i] - ps.sin_part[i];
    return out;
  };

  PrueferSolution sol;
  sol.grid = grid;
  sol.lambda = lambda;
  sol.kind = kind;
  sol.contraction_bound = 2.0 * std::pow(prof.k_const, 4) * prof.Ups_pprime;

  // Plain fixed-point iteration on eta.
  std::vector<Cx> eta(n, Cx{});
  double prev_step = 0.0;
  int grow = 0;
  bool converged = false;
  int iters = 0;
  for (; iters < 80; ++iters) {
    std::vector<Cx> next = apply_F(eta);
    std::vector<Cx> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = next[i] - eta[i];
    const double step = sup_norm(diff);
    eta = std::move(next);
    sol.step_norm = step;
    if (step <= 1e-13 * std::max(1.0, sup_norm(eta))) {
      converged = true;
      ++iters;
      break;
    }
    grow = (iters > 0 && step > prev_step) ? grow + 1 : 0;
    if (grow >= 2) break;
    prev_step = step;
  }
  sol.iterations = iters;

  // Preconditioned form: with f0 = F(0) and the kernel
  // g(t) = -2 q1 sin(2 lambda t + 2 f0) - 2 half23 cos(2 lambda t + 2 f0)
  // (the derivative of F at f0), solve w = Phi(w) = (I - G1)^{-1}(T(w) - G1 w),
  // T(w) = F(f0 + w) - f0. (I - G1)^{-1} v is computed exactly through the
  // scalar linear equation z' = g (v + z).
  const std::vector<Cx> f0 = apply_F(std::vector<Cx>(n, Cx{}));
  std::vector<Cx> g(n);
  for (int i = 0; i < n; ++i) {
    const Cx ph = 2.0 * lambda * grid->node(i) + 2.0 * f0[i];
    g[i] = -2.0 * qc[i] * std::sin(ph) - 2.0 * half23[i] * std::cos(ph);
  }
  const std::vector<Cx> G = grid->integrate_prefix(g);
  auto solve_resolvent = [&](const std::vector<Cx>& v) {
    std::vector<Cx> integrand(n);
    for (int i = 0; i < n; ++i)
      integrand[i] = std::exp(-G[i]) * g[i] * v[i];
    const auto z = grid->integrate_prefix(integrand);
    std::vector<Cx> u(n);
    for (int i = 0; i < n; ++i) u[i] = v[i] + std::exp(G[i]) * z[i];
    return u;
  };
  auto apply_Phi = [&](const std::vector<Cx>& w) {
    std::vector<Cx> shifted(n);
    for (int i = 0; i < n; ++i) shifted[i] = f0[i] + w[i];
    const auto Fw = apply_F(shifted);
    const auto G1w = grid->integrate_prefix([&] {
      std::vector<Cx> gw(n);
      for (int i = 0; i < n; ++i) gw[i] = g[i] * w[i];
      return gw;
    }());
    std::vector<Cx> v(n);
    for (int i = 0; i < n; ++i) v[i] = Fw[i] - f0[i] - G1w[i];
    return solve_resolvent(v);
  };

  // Measure the contraction of Phi on its first steps; if the plain
  // iteration failed, keep iterating Phi to convergence.
  std::vector<Cx> w(n, Cx{});
  std::vector<Cx> w1 = apply_Phi(w);
  std::vector<Cx> d1(n);
  for (int i = 0; i < n; ++i) d1[i] = w1[i] - w[i];
  double dprev = seq_lp(*grid, d1, p_conj);
  double factor = 0.0;
  w = std::move(w1);
  for (int m = 0; m < (converged ? 3 : 60); ++m) {
    std::vector<Cx> next = apply_Phi(w);
    std::vector<Cx> d(n);
    for (int i = 0; i < n; ++i) d[i] = next[i] - w[i];
    const double dn = seq_lp(*grid, d, p_conj);
    if (dprev > 1e-14) factor = std::max(factor, dn / dprev);
    dprev = dn;
    w = std::move(next);
    if (!converged) {
      ++sol.iterations;
      sol.step_norm = sup_norm(d);
      if (sol.step_norm <= 1e-13) break;
    } else if (dn <= 1e-14) {
      break;
    }
  }
  sol.contraction_factor = factor;
  if (!converged) {
    sol.used_fallback = true;
    if (sol.step_norm > 1e-10)
      throw NumericError(
          "pruefer: fixed-point iteration did not converge (last step " +
          std::to_string(sol.step_norm) + ")");
    eta.resize(n);
    for (int i = 0; i < n; ++i) eta[i] = f0[i] + w[i];
  }

  // Radial part: r = W exp(Rr), Rr(x) = int_0^x qc sin(2 theta) +
  // half23 cos(2 theta) dt, assembled with the same product rule.
  std::vector<Cx> gc(n), gs(n);
  for (int i = 0; i < n; ++i) {
    const Cx c2 = std::cos(2.0 * eta[i]), s2 = std::sin(2.0 * eta[i]);
    gc[i] = qc[i] * c2 - half23[i] * s2;
    gs[i] = qc[i] * s2 + half23[i] * c2;
  }
  const auto pc = osc_prefix_sincos(*grid, gc, 2.0 * lambda);
  const auto ps = osc_prefix_sincos(*grid, gs, 2.0 * lambda);

  sol.eta = GridFn1(grid);
  sol.theta = GridFn1(grid);
  sol.r = GridFn1(grid);
  sol.rho = GridFn1(grid);
  sol.y = GridFn2(grid);
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    sol.eta.v[i] = eta[i];
    sol.theta.v[i] = lambda * x + eta[i];
    const Cx Rr = ps.cos_part[i] + pc.sin_part[i];
    const Cx growth = std::exp(Rr);
    sol.r.v[i] = sp.weight[i] * growth;
    sol.rho.v[i] = growth - 1.0;
    const Cx st = std::sin(sol.theta.v[i]), ct = std::cos(sol.theta.v[i]);
    if (kind == PrueferKind::SType) {
      sol.y.a[i] = sol.r.v[i] * st;
      sol.y.b[i] = sol.r.v[i] * ct;
    } else {
      sol.y.a[i] = sol.r.v[i] * ct;
      sol.y.b[i] = -sol.r.v[i] * st;
    }
  }
  return sol;
}

}  // namespace dirac
