#include "diracspec/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dirac {
namespace {

// 4-point Gauss-Legendre rule on [-1, 1].
constexpr double GL_X1 = 0.33998104358485626;
constexpr double GL_X2 = 0.86113631159405257;
constexpr double GL_W1 = 0.65214515486254614;
constexpr double GL_W2 = 0.34785484513745386;

// Reference positions (unit cell) of the 6 per-cell nodes.
const std::array<double, 6>& ref_nodes_impl() {
  static const std::array<double, 6> r = {
      0.0, 0.5 * (1.0 - GL_X2), 0.5 * (1.0 - GL_X1),
      0.5 * (1.0 + GL_X1), 0.5 * (1.0 + GL_X2), 1.0};
  return r;
}

// Monomial coefficients of the six Lagrange basis polynomials on the
// reference nodes; degree 5, well conditioned on [0, 1].
using Poly = std::array<double, 6>;
const std::array<Poly, 6>& lagrange_coeffs() {
  static const std::array<Poly, 6> basis = [] {
    const auto& r = ref_nodes_impl();
    std::array<Poly, 6> out{};
    for (int k = 0; k < 6; ++k) {
      Poly c{};
      c[0] = 1.0;
      int deg = 0;
      double denom = 1.0;
      for (int j = 0; j < 6; ++j) {
        if (j == k) continue;
        // c *= (t - r[j])
        Poly next{};
        for (int i = 0; i <= deg; ++i) {
          next[i + 1] += c[i];
          next[i] -= r[j] * c[i];
        }
        ++deg;
        c = next;
        denom *= (r[k] - r[j]);
      }
      for (auto& ci : c) ci /= denom;
      out[k] = c;
    }
    return out;
  }();
  return basis;
}

// P[j][k] = integral of basis k from 0 to r[j]; D[j][k] = basis k derivative
// at r[j].
struct RefMatrices {
  std::array<std::array<double, 6>, 6> P{};
  std::array<std::array<double, 6>, 6> D{};
};
const RefMatrices& ref_matrices() {
  static const RefMatrices m = [] {
    RefMatrices out;
    const auto& r = ref_nodes_impl();
    const auto& basis = lagrange_coeffs();
    for (int j = 0; j < 6; ++j) {
      for (int k = 0; k < 6; ++k) {
        double integral = 0.0, deriv = 0.0, tp = r[j];
        for (int i = 0; i < 6; ++i) {
          integral += basis[k][i] * tp / (i + 1);
          tp *= r[j];
        }
        tp = 1.0;
        for (int i = 1; i < 6; ++i) {
          deriv += i * basis[k][i] * tp;
          tp *= r[j];
        }
        out.P[j][k] = integral;
        out.D[j][k] = deriv;
      }
    }
    return out;
  }();
  return m;
}

}  // namespace

const std::array<double, 6>& Grid::ref_nodes() { return ref_nodes_impl(); }

std::shared_ptr<const Grid> Grid::make(int n_cells,
                                       std::span<const double> breakpoints) {
  if (n_cells < 1) throw ConfigError("grid: n_cells must be >= 1");
  auto grid = std::shared_ptr<Grid>(new Grid());
  auto& edges = grid->edges_;
  edges.reserve(n_cells + 1 + breakpoints.size());
  for (int i = 0; i <= n_cells; ++i) edges.push_back(PI * i / n_cells);
  const double tol = 1e-12;
  for (double b : breakpoints) {
    if (b <= tol || b >= PI - tol) continue;
    auto it = std::lower_bound(edges.begin(), edges.end(), b);
    if (it != edges.end() && std::abs(*it - b) < tol) continue;
    if (it != edges.begin() && std::abs(*(it - 1) - b) < tol) continue;
    edges.insert(it, b);
  }
  const int nc = static_cast<int>(edges.size()) - 1;
  grid->nodes_.reserve(5 * nc + 1);
  grid->weights_.reserve(5 * nc + 1);
  for (int c = 0; c < nc; ++c) {
    const double a = edges[c], h = edges[c + 1] - edges[c];
    const double mid = a + 0.5 * h, half = 0.5 * h;
    grid->nodes_.push_back(a);
    grid->weights_.push_back(0.0);
    const double gx[4] = {-GL_X2, -GL_X1, GL_X1, GL_X2};
    const double gw[4] = {GL_W2, GL_W1, GL_W1, GL_W2};
    for (int k = 0; k < 4; ++k) {
      grid->nodes_.push_back(mid + half * gx[k]);
      grid->weights_.push_back(half * gw[k]);
    }
  }
  grid->nodes_.push_back(edges.back());
  grid->weights_.push_back(0.0);
  return grid;
}

int Grid::locate(double x) const {
  if (x <= edges_.front()) return 0;
  if (x >= edges_.back()) return n_cells() - 1;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  return static_cast<int>(it - edges_.begin()) - 1;
}

Cx Grid::integrate(std::span<const Cx> values) const {
  Cx acc{};
  for (size_t i = 0; i < values.size(); ++i) acc += weights_[i] * values[i];
  return acc;
}

std::vector<Cx> Grid::integrate_prefix(std::span<const Cx> values) const {
  const auto& M = ref_matrices();
  std::vector<Cx> out(values.size());
  Cx acc{};
  for (int c = 0; c < n_cells(); ++c) {
    const int base = cell_base(c);
    const double h = cell_width(c);
    for (int j = (c == 0 ? 0 : 1); j < 6; ++j) {
      Cx s{};
      for (int k = 0; k < 6; ++k) s += M.P[j][k] * values[base + k];
      out[base + j] = acc + h * s;
    }
    acc = out[base + 5];
  }
  return out;
}

std::vector<Cx> Grid::derivative(std::span<const Cx> values) const {
  const auto& M = ref_matrices();
  std::vector<Cx> out(values.size(), Cx{});
  std::vector<int> hits(values.size(), 0);
  for (int c = 0; c < n_cells(); ++c) {
    const int base = cell_base(c);
    const double inv_h = 1.0 / cell_width(c);
    for (int j = 0; j < 6; ++j) {
      Cx s{};
      for (int k = 0; k < 6; ++k) s += M.D[j][k] * values[base + k];
      out[base + j] += s * inv_h;
      ++hits[base + j];
    }
  }
  for (size_t i = 0; i < out.size(); ++i)
    if (hits[i] > 1) out[i] *= 1.0 / hits[i];
  return out;
}

Cx Grid::eval(std::span<const Cx> values, double x) const {
  const int c = locate(x);
  const int base = cell_base(c);
  const double t = (x - edges_[c]) / cell_width(c);
  const auto& basis = lagrange_coeffs();
  Cx acc{};
  for (int k = 0; k < 6; ++k) {
    double bk = 0.0, tp = 1.0;
    for (int i = 0; i < 6; ++i) {
      bk += basis[k][i] * tp;
      tp *= t;
    }
    acc += bk * values[base + k];
  }
  return acc;
}

double lp_norm(const GridFn1& f, double p) {
  const auto& g = *f.grid;
  if (std::isinf(p) || p >= 1e100) {
    double m = 0.0;
    for (const Cx& v : f.v) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i)
    acc += g.weight(i) * std::pow(std::abs(f.v[i]), p);
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const GridFn2& f, double p) {
  const auto& g = *f.grid;
  if (std::isinf(p) || p >= 1e100) {
    double m = 0.0;
    for (int i = 0; i < g.n_nodes(); ++i)
      m = std::max(m, std::hypot(std::abs(f.a[i]), std::abs(f.b[i])));
    return m;
  }
  double acc = 0.0;
  for (int i = 0; i < g.n_nodes(); ++i) {
    const double mag = std::hypot(std::abs(f.a[i]), std::abs(f.b[i]));
    acc += g.weight(i) * std::pow(mag, p);
  }
  return std::pow(acc, 1.0 / p);
}

Cx inner_product(const GridFn2& f, const GridFn2& g) {
  const auto& grid = *f.grid;
  Cx acc{};
  for (int i = 0; i < grid.n_nodes(); ++i)
    acc += grid.weight(i) *
           (f.a[i] * std::conj(g.a[i]) + f.b[i] * std::conj(g.b[i]));
  return acc;
}

std::vector<double> fd_weights(double x0, std::span<const double> xs, int m) {
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::vector<std::vector<double>>> d(
      m + 1, std::vector<std::vector<double>>(n + 1,
                                              std::vector<double>(n + 1, 0.0)));
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i <= n; ++i) {
    double c2 = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      for (int k = 0; k <= std::min(i, m); ++k) {
        d[k][i][j] = ((xs[i] - x0) * d[k][i - 1][j] -
                      (k > 0 ? k * d[k - 1][i - 1][j] : 0.0)) /
                     c3;
      }
    }
    for (int k = 0; k <= std::min(i, m); ++k) {
      d[k][i][i] = c1 / c2 *
                   ((k > 0 ? k * d[k - 1][i - 1][i - 1] : 0.0) -
                    (xs[i - 1] - x0) * d[k][i - 1][i - 1]);
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = d[m][n][j];
  return w;
}

}  // namespace dirac
