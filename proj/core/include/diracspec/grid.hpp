#pragma once

#include <memory>
#include <span>
#include <vector>

#include "diracspec/types.hpp"

namespace dirac {

// Shared quadrature grid on [0, pi]: a partition into cells, each carrying a
// 4-point Gauss-Legendre rule plus its two edges (edges have weight 0, so the
// node list starts at 0 and ends at pi while the quadrature stays pure GL).
// Per cell there are 6 nodes: edge, 4 GL nodes, edge; adjacent cells share an
// edge node. Node count = 5*n_cells + 1.
class Grid {
 public:
  // Uniform cells; any points in `breakpoints` (interior to (0, pi)) are
  // inserted as extra cell edges so piecewise-defined data stays smooth
  // inside every cell.
  static std::shared_ptr<const Grid> make(int n_cells,
                                          std::span<const double> breakpoints = {});

  int n_cells() const { return static_cast<int>(edges_.size()) - 1; }
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  double node(int i) const { return nodes_[i]; }
  double weight(int i) const { return weights_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& edges() const { return edges_; }
  double cell_width(int c) const { return edges_[c + 1] - edges_[c]; }
  // First node index of cell c; the cell's 6 nodes are base..base+5.
  int cell_base(int c) const { return 5 * c; }
  // Cell containing x (edges resolve to the right cell except at pi).
  int locate(double x) const;

  Cx integrate(std::span<const Cx> values) const;
  // Cumulative integral from 0 to every node, via exact integration of the
  // per-cell degree-5 interpolant.
  std::vector<Cx> integrate_prefix(std::span<const Cx> values) const;
  // Derivative at every node from the per-cell degree-5 interpolant; shared
  // edge nodes average the two one-sided values.
  std::vector<Cx> derivative(std::span<const Cx> values) const;
  // Degree-5 interpolation of nodal values at an arbitrary x in [0, pi].
  Cx eval(std::span<const Cx> values, double x) const;

  // Reference node positions within a unit cell.
  static const std::array<double, 6>& ref_nodes();

 private:
  Grid() = default;
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Scalar function sampled on all grid nodes.
struct GridFn1 {
  GridPtr grid;
  std::vector<Cx> v;

  GridFn1() = default;
  explicit GridFn1(GridPtr g) : grid(std::move(g)), v(grid->n_nodes(), Cx{}) {}
};

// C^2-valued function sampled on all grid nodes (components a, b).
struct GridFn2 {
  GridPtr grid;
  std::vector<Cx> a, b;

  GridFn2() = default;
  explicit GridFn2(GridPtr g)
      : grid(std::move(g)), a(grid->n_nodes(), Cx{}), b(grid->n_nodes(), Cx{}) {}

  Vec2 at(int i) const { return {a[i], b[i]}; }
  void set(int i, const Vec2& y) {
    a[i] = y.a;
    b[i] = y.b;
  }
};

// L^p norms over [0, pi] of nodal data (p = inf: max over nodes).
double lp_norm(const GridFn1& f, double p);
double lp_norm(const GridFn2& f, double p);

// Integral of f . conj(g) (component sum) over [0, pi].
Cx inner_product(const GridFn2& f, const GridFn2& g);

// Finite-difference weights for the m-th derivative at x0 from arbitrary
// sample locations xs (Fornberg's recurrence). Returns one weight per sample.
std::vector<double> fd_weights(double x0, std::span<const double> xs, int m);

}  // namespace dirac
