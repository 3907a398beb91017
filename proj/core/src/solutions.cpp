#include "diracspec/solutions.hpp"

#include <algorithm>
#include <cmath>

#include "diracspec/oscillatory.hpp"

namespace dirac {
namespace {

// Gauss points of the 4th-order commutator-free Magnus scheme.
constexpr double CF4_C1 = 0.5 - 0.28867513459481287;  // 1/2 - sqrt(3)/6
constexpr double CF4_C2 = 0.5 + 0.28867513459481287;
constexpr double CF4_A1 = (3.0 - 2.0 * 1.7320508075688772) / 12.0;
constexpr double CF4_A2 = (3.0 + 2.0 * 1.7320508075688772) / 12.0;

Mat2 zero_end(Cx lambda) {
  const Cx c = std::cos(lambda * PI), s = std::sin(lambda * PI);
  return {c, s, -s, c};
}

Vec2 zero_c(Cx lambda, double x) {
  return {std::cos(lambda * x), -std::sin(lambda * x)};
}
Vec2 zero_s(Cx lambda, double x) {
  return {std::sin(lambda * x), std::cos(lambda * x)};
}

// One CF4 step over [a, a+h] given the potential part at the two Gauss
// points; applies exp(h(A1 V1 + A2 V2 + lambda B / 2)) after
// exp(h(A2 V1 + A1 V2 + lambda B / 2)). This ordering is what makes the
// scheme 4th order; the reverse degrades it to 2nd.
Mat2 cf4_step(Cx lambda, double h, const Mat2& V1, const Mat2& V2) {
  const Cx lh = 0.5 * lambda * h;
  Mat2 M1 = (V1 * CF4_A2 + V2 * CF4_A1) * h;
  M1.m12 += lh;
  M1.m21 -= lh;
  Mat2 M2 = (V1 * CF4_A1 + V2 * CF4_A2) * h;
  M2.m12 += lh;
  M2.m21 -= lh;
  return expm(M2) * expm(M1);
}

double mat_norm(const Mat2& m) {
  return std::max(std::max(std::abs(m.m11), std::abs(m.m12)),
                  std::max(std::abs(m.m21), std::abs(m.m22)));
}

}  // namespace

DiracSolver::DiracSolver(Potential Q) : Q_(std::move(Q)), zero_(Q_.is_zero()) {}

Mat2 DiracSolver::v_matrix(double x) const {
  return {-Q_.q3(x), -Q_.q4(x), Q_.q1(x), Q_.q2(x)};
}

int DiracSolver::cells_for(Cx lambda, double tol) const {
  // Empirical endpoint-error model err ~ C(lambda) / N^4 with
  // C = 4 (1 + 0.05 |lambda|^2), margin ~4x over measured constants.
  const double C = 4.0 * (1.0 + 0.05 * std::norm(lambda));
  const double n = std::pow(C / std::max(tol, 1e-15), 0.25);
  int cells = static_cast<int>(std::ceil(n / 16.0)) * 16;
  return std::clamp(cells, 256, 32768);
}

const DiracSolver::CellTable& DiracSolver::table(int n_cells) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(n_cells);
  if (it != cache_.end()) return it->second;
  CellTable t;
  t.edges.reserve(n_cells + 1 + Q_.breakpoints.size());
  for (int i = 0; i <= n_cells; ++i) t.edges.push_back(PI * i / n_cells);
  for (double b : Q_.breakpoints) {
    if (b <= 1e-12 || b >= PI - 1e-12) continue;
    auto pos = std::lower_bound(t.edges.begin(), t.edges.end(), b);
    if (pos != t.edges.end() && std::abs(*pos - b) < 1e-12) continue;
    if (pos != t.edges.begin() && std::abs(*(pos - 1) - b) < 1e-12) continue;
    t.edges.insert(pos, b);
  }
  const int nc = static_cast<int>(t.edges.size()) - 1;
  t.V1.resize(nc);
  t.V2.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const double a = t.edges[c], h = t.edges[c + 1] - t.edges[c];
    t.V1[c] = v_matrix(a + CF4_C1 * h);
    t.V2[c] = v_matrix(a + CF4_C2 * h);
  }
  return cache_.emplace(n_cells, std::move(t)).first->second;
}

Mat2 DiracSolver::end_matrix(Cx lambda, double tol) const {
  if (zero_) return zero_end(lambda);
  const auto& t = table(cells_for(lambda, tol));
  Mat2 Y = Mat2::identity();
  const int nc = static_cast<int>(t.V1.size());
  for (int c = 0; c < nc; ++c) {
    const double h = t.edges[c + 1] - t.edges[c];
    Y = cf4_step(lambda, h, t.V1[c], t.V2[c]) * Y;
  }
  return Y;
}

Mat2 DiracSolver::end_matrix_checked(Cx lambda, double tol,
                                     double& err_estimate) const {
  if (zero_) {
    err_estimate = 0.0;
    return zero_end(lambda);
  }
  int cells = cells_for(lambda, tol);
  for (int attempt = 0; attempt < 4; ++attempt) {
    const auto& fine = table(cells);
    const auto& coarse = table(cells / 2);
    auto run = [&](const CellTable& t) {
      Mat2 Y = Mat2::identity();
      for (size_t c = 0; c < t.V1.size(); ++c) {
        const double h = t.edges[c + 1] - t.edges[c];
        Y = cf4_step(lambda, h, t.V1[c], t.V2[c]) * Y;
      }
      return Y;
    };
    const Mat2 Yf = run(fine), Yc = run(coarse);
    err_estimate = mat_norm(Yf - Yc) / 15.0;  // 4th-order Richardson
    if (err_estimate <= tol || cells >= 32768) return Yf;
    cells = std::min(32768, cells * 2);
  }
  return end_matrix(lambda, tol);
}

FundamentalPair DiracSolver::dense_pair(Cx lambda, const GridPtr& grid) const {
  FundamentalPair out;
  out.grid = grid;
  out.lambda = lambda;
  out.c = GridFn2(grid);
  out.s = GridFn2(grid);
  const int n = grid->n_nodes();
  if (zero_) {
    for (int i = 0; i < n; ++i) {
      out.c.set(i, zero_c(lambda, grid->node(i)));
      out.s.set(i, zero_s(lambda, grid->node(i)));
    }
    out.end = zero_end(lambda);
    out.err_estimate = 0.0;
    return out;
  }
  Mat2 Y = Mat2::identity();
  out.c.set(0, {1.0, 0.0});
  out.s.set(0, {0.0, 1.0});
  for (int k = 0; k + 1 < n; ++k) {
    const double a = grid->node(k), h = grid->node(k + 1) - a;
    if (h > 0.0) {
      const Mat2 V1 = v_matrix(a + CF4_C1 * h), V2 = v_matrix(a + CF4_C2 * h);
      Y = cf4_step(lambda, h, V1, V2) * Y;
    }
    out.c.set(k + 1, {Y.m11, Y.m21});
    out.s.set(k + 1, {Y.m12, Y.m22});
  }
  out.end = Y;
  double est = 0.0;
  const Mat2 ref = end_matrix_checked(lambda, 1e-11, est);
  out.err_estimate = std::max(mat_norm(Y - ref), est);
  return out;
}

GridFn2 DiracSolver::solve_ivp(Cx lambda, Vec2 y0, const GridPtr& grid) const {
  const FundamentalPair fp = dense_pair(lambda, grid);
  GridFn2 out(grid);
  for (int i = 0; i < grid->n_nodes(); ++i) {
    out.a[i] = fp.c.a[i] * y0.a + fp.s.a[i] * y0.b;
    out.b[i] = fp.c.b[i] * y0.a + fp.s.b[i] * y0.b;
  }
  return out;
}

Mat2 DiracSolver::end_matrix_rk45(Cx lambda, double tol) const {
  if (zero_) return zero_end(lambda);
  auto rhs = [&](double x, const Mat2& Y) {
    Mat2 M = v_matrix(x);
    M.m12 += lambda;
    M.m21 -= lambda;
    return M * Y;
  };
  Mat2 Y = Mat2::identity();
  double x = 0.0;
  double h = 1e-3 / (1.0 + std::abs(lambda));
  const double rtol = tol, atol = tol * 1e-2;
  long steps = 0;
  while (x < PI) {
    if (x + h > PI) h = PI - x;
    const Mat2 k1 = rhs(x, Y);
    const Mat2 k2 = rhs(x + h / 5.0, Y + k1 * (h / 5.0));
    const Mat2 k3 = rhs(x + 3.0 * h / 10.0, Y + k1 * (3.0 * h / 40.0) + k2 * (9.0 * h / 40.0));
    const Mat2 k4 = rhs(x + 4.0 * h / 5.0, Y + k1 * (44.0 * h / 45.0) -
                                               k2 * (56.0 * h / 15.0) + k3 * (32.0 * h / 9.0));
    const Mat2 k5 = rhs(x + 8.0 * h / 9.0,
                        Y + k1 * (19372.0 * h / 6561.0) - k2 * (25360.0 * h / 2187.0) +
                            k3 * (64448.0 * h / 6561.0) - k4 * (212.0 * h / 729.0));
    const Mat2 k6 = rhs(x + h, Y + k1 * (9017.0 * h / 3168.0) - k2 * (355.0 * h / 33.0) +
                                   k3 * (46732.0 * h / 5247.0) + k4 * (49.0 * h / 176.0) -
                                   k5 * (5103.0 * h / 18656.0));
    const Mat2 y5 = Y + k1 * (35.0 * h / 384.0) + k3 * (500.0 * h / 1113.0) +
                    k4 * (125.0 * h / 192.0) - k5 * (2187.0 * h / 6784.0) +
                    k6 * (11.0 * h / 84.0);
    const Mat2 k7 = rhs(x + h, y5);
    const Mat2 y4 = Y + k1 * (5179.0 * h / 57600.0) + k3 * (7571.0 * h / 16695.0) +
                    k4 * (393.0 * h / 640.0) - k5 * (92097.0 * h / 339200.0) +
                    k6 * (187.0 * h / 2100.0) + k7 * (h / 40.0);
    const double err = mat_norm(y5 - y4);
    const double sc = atol + rtol * std::max(1.0, mat_norm(Y));
    if (err <= sc) {
      x += h;
      Y = y5;
    }
    const double factor = 0.9 * std::pow(sc / std::max(err, 1e-300), 0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    if (++steps > 2000000)
      throw NumericError("rk45: step limit exceeded at lambda = (" +
                         std::to_string(lambda.real()) + ", " +
                         std::to_string(lambda.imag()) + ")");
  }
  return Y;
}

RemainderProfile remainder_profile(const SampledPotential& sp, double R,
                                   double p_conj, double alpha, Cx lambda) {
  const auto& grid = *sp.grid;
  RemainderProfile out;
  out.grid = sp.grid;
  out.lambda = lambda;

  std::vector<Cx> half23(sp.sum23.size());
  for (size_t i = 0; i < half23.size(); ++i) half23[i] = 0.5 * sp.sum23[i];

  const auto pq1 = osc_prefix_sincos(grid, sp.halfc, 2.0 * lambda);
  const auto p23 = osc_prefix_sincos(grid, half23, 2.0 * lambda);

  out.ups1 = GridFn1(sp.grid);
  out.ups2 = GridFn1(sp.grid);
  out.ups3 = GridFn1(sp.grid);
  out.ups4 = GridFn1(sp.grid);
  out.Ups = GridFn1(sp.grid);
  for (int i = 0; i < grid.n_nodes(); ++i) {
    out.ups1.v[i] = pq1.sin_part[i];
    out.ups2.v[i] = pq1.cos_part[i];
    out.ups3.v[i] = p23.sin_part[i];
    out.ups4.v[i] = p23.cos_part[i];
    const double tot = std::abs(out.ups1.v[i]) + std::abs(out.ups2.v[i]) +
                       std::abs(out.ups3.v[i]) + std::abs(out.ups4.v[i]);
    out.Ups.v[i] = Cx(tot, 0.0);
    out.Ups_sup = std::max(out.Ups_sup, tot);
  }
  out.Ups_pprime = lp_norm(out.Ups, p_conj);
  out.k_const = 2.0 + 12.0 * R * std::cosh(2.0 * PI * alpha + 1.0);
  out.threshold = 1.0 / (8.0 * std::pow(out.k_const, 4));
  out.in_strip = std::abs(lambda.imag()) <= alpha + 1e-12;
  out.in_domain = out.in_strip && out.Ups_sup < out.threshold;
  return out;
}

}  // namespace dirac
