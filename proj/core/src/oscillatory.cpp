#include "diracspec/oscillatory.hpp"

#include <array>
#include <cmath>

namespace dirac {
namespace {

// Monomial coefficients of the six reference-cell Lagrange basis polynomials:
// L_k(t) = sum_i B[k][i] t^i for t in [0, 1].
std::array<std::array<double, 6>, 6> lagrange_monomials() {
  const auto& tn = Grid::ref_nodes();
  std::array<std::array<double, 6>, 6> B{};
  for (int k = 0; k < 6; ++k) {
    std::array<double, 7> poly{};
    poly[0] = 1.0;
    int deg = 0;
    double den = 1.0;
    for (int j = 0; j < 6; ++j) {
      if (j == k) continue;
      for (int i = deg + 1; i >= 1; --i) poly[i] = poly[i - 1] - tn[j] * poly[i];
      poly[0] = -tn[j] * poly[0];
      ++deg;
      den *= tn[k] - tn[j];
    }
    for (int i = 0; i < 6; ++i) B[k][i] = poly[i] / den;
  }
  return B;
}

// M_m(phi) = int_0^1 t^m e^{i phi t} dt, m = 0..5.  Power series below
// |phi| = 4 (the forward recurrence cancels there), closed-form recurrence
// above (amplification m!/|phi|^m stays below 1 for m <= 5).
void unit_moments(Cx phi, std::array<Cx, 6>& M) {
  const Cx iphi = Cx(0.0, 1.0) * phi;
  if (std::abs(phi) <= 4.0) {
    for (int m = 0; m < 6; ++m) {
      Cx term(1.0, 0.0), s{};
      for (int k = 0; k < 36; ++k) {
        s += term / double(k + m + 1);
        term *= iphi / double(k + 1);
      }
      M[m] = s;
    }
  } else {
    const Cx e = std::exp(iphi);
    M[0] = (e - 1.0) / iphi;
    for (int m = 1; m < 6; ++m) M[m] = (e - double(m) * M[m - 1]) / iphi;
  }
}

}  // namespace

std::vector<Cx> osc_prefix(const Grid& grid, std::span<const Cx> g, Cx omega) {
  static const std::array<std::array<double, 6>, 6> B = lagrange_monomials();
  const auto& tn = Grid::ref_nodes();
  const int n = grid.n_nodes();
  std::vector<Cx> out(n);
  out[0] = Cx{};
  Cx acc{};
  for (int c = 0; c < grid.n_cells(); ++c) {
    const int base = grid.cell_base(c);
    const double a = grid.edges()[c];
    const double h = grid.cell_width(c);
    if (h <= 0.0) {
      for (int j = 1; j < 6; ++j) out[base + j] = acc;
      continue;
    }
    // Monomial coefficients of the degree-5 interpolant on the reference cell.
    std::array<Cx, 6> cm{};
    for (int k = 0; k < 6; ++k) {
      const Cx v = g[base + k];
      for (int i = 0; i < 6; ++i) cm[i] += v * B[k][i];
    }
    const Cx theta = omega * h;
    const Cx phase = std::exp(Cx(0.0, 1.0) * omega * a);
    // Partial integral up to each interior node: substituting t -> t_j u maps
    // int_0^{t_j} t^i e^{i theta t} dt to t_j^{i+1} M_i(theta t_j).
    for (int j = 1; j < 6; ++j) {
      const double tj = tn[j];
      std::array<Cx, 6> M;
      unit_moments(theta * tj, M);
      Cx cell{};
      double tp = tj;
      for (int i = 0; i < 6; ++i) {
        cell += cm[i] * tp * M[i];
        tp *= tj;
      }
      out[base + j] = acc + phase * h * cell;
    }
    acc = out[base + 5];
  }
  return out;
}

SinCosPrefix osc_prefix_sincos(const Grid& grid, std::span<const Cx> g, Cx w) {
  const auto plus = osc_prefix(grid, g, w);
  const auto minus = osc_prefix(grid, g, -w);
  SinCosPrefix out;
  const size_t n = plus.size();
  out.sin_part.resize(n);
  out.cos_part.resize(n);
  const Cx half(0.5, 0.0), half_over_i(0.0, -0.5);
  for (size_t k = 0; k < n; ++k) {
    out.cos_part[k] = half * (plus[k] + minus[k]);
    out.sin_part[k] = half_over_i * (plus[k] - minus[k]);
  }
  return out;
}

}  // namespace dirac
