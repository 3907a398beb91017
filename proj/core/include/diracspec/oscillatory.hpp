#pragma once

#include <span>
#include <vector>

#include "diracspec/grid.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// Prefix integrals int_0^{x_k} g(t) e^{i omega t} dt at every grid node,
// integrating the per-cell degree-5 interpolant of the nodal samples g
// exactly against the exponential (stable series branch for small moments).
// Accuracy is O(h^6 ||g^(6)||) from interpolation alone, uniformly in omega.
std::vector<Cx> osc_prefix(const Grid& grid, std::span<const Cx> g, Cx omega);

// Convenience: prefix integrals of g(t) sin(w t) and g(t) cos(w t).
struct SinCosPrefix {
  std::vector<Cx> sin_part;
  std::vector<Cx> cos_part;
};
SinCosPrefix osc_prefix_sincos(const Grid& grid, std::span<const Cx> g, Cx w);

}  // namespace dirac
