#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diracspec/grid.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// Two-point boundary form U(y) = A y(0) + B y(pi) (rows U_1, U_2); the 2x4
// matrix [A | B] is assumed to have rank 2.
struct BoundaryForm {
  Mat2 A, B;

  // Minor J_{ab} of [A | B] from columns a, b in 1..4.
  Cx minor(int a, int b) const;
  bool full_rank() const;
};

// Presets.
BoundaryForm dirichlet_form();
BoundaryForm dirichlet_neumann_form();
BoundaryForm periodic_form();
BoundaryForm antiperiodic_form();
BoundaryForm quasiperiodic_form(double alpha);  // y(pi) = e^{i alpha} y(0)

// Boundary form of the associated unperturbed comparison problem: the y(pi)
// columns are scaled by W(pi).
BoundaryForm associated_form(const BoundaryForm& bf, Cx W_end);

enum class BoundaryClass {
  StronglyRegular,
  RegularNotStrong,
  NondegenerateOnly,
  Degenerate,
};

std::string to_string(BoundaryClass c);

// Coefficients of the characteristic quadratic
//   W a z^2 + 2 b z + W abar = 0,  z = e^{i pi lambda},
// equivalent to the unperturbed determinant
//   Delta0(lambda) = (W a / 2) e^{i pi lambda} + b + (W abar / 2) e^{-i pi lambda},
// with a = J14 - J23 - i (J13 + J24), abar = J14 - J23 + i (J13 + J24),
// b = J12 + W^2 J34. Regular: a != 0 and abar != 0; strongly regular adds
// b^2 - W^2 a abar != 0; degenerate: a = b = abar = 0.
struct Classification {
  BoundaryClass kind;
  Cx a, b, abar;
  Cx disc;     // b^2 - W^2 a abar
  Cx W_end;
  std::array<Cx, 2> witnesses;  // (a, abar)
};

Classification classify(const BoundaryForm& bf, Cx W_end);

// Unperturbed characteristic determinant and its boundary matrix
// M0(lambda) = [[U_1(c0), U_1(s0)], [U_2(c0), U_2(s0)]] with the closed-form
// pair c0 = (cos, -sin), s0 = (sin, cos).
Mat2 M0_matrix(const BoundaryForm& bf, Cx lambda);
Cx delta0(const BoundaryForm& bf, Cx W_end, Cx lambda);

enum class SpectrumKind { TwoSeries, SingleSeries, Empty, WholePlane };

// Zero set of Delta0 organized into arithmetic progressions. For TwoSeries
// the n-th point is kappa_{n mod 2} + n (multiplicities arise where the two
// series meet); SingleSeries has points kappa0 + 2m; Empty/WholePlane have
// no points / all of C.
struct UnperturbedSpectrum {
  SpectrumKind kind;
  Classification cls;
  Cx z0{}, z1{};          // quadratic roots (TwoSeries), or the single root
  Cx kappa0{}, kappa1{};  // series offsets
  Cx lambda0(long n) const;
  int multiplicity(long n) const;
};

UnperturbedSpectrum unperturbed_spectrum(const BoundaryForm& bf, Cx W_end);

// Eigenfunction data of the unperturbed problem at an eigenvalue lambda.
struct UnperturbedEigen {
  Cx lambda;
  int geometric_multiplicity = 1;
  Vec2 gamma;            // y0 = gamma.a c0 + gamma.b s0
  std::optional<Vec2> gamma2;  // second basis vector when multiplicity 2
  GridFn2 y;             // normalized ||y||_2 = 1
  std::optional<GridFn2> y2;
  // First associated function when the eigenvalue is a double zero with a
  // one-dimensional eigenspace: y1 = x (gamma.b c0 - gamma.a s0)
  // + beta1 c0 + beta2 s0, with U(y1) = 0 and <y0, y1> = 0.
  std::optional<GridFn2> jordan;
  Cx beta1{}, beta2{};
};

UnperturbedEigen unperturbed_eigenfunction(const BoundaryForm& bf, Cx lambda,
                                           const GridPtr& grid);

// Resolvent of the unperturbed operator: solves -B y' - lambda y = f with
// U(y) = 0 by variation of constants on the closed-form fundamental pair.
// Throws NumericError if lambda is (numerically) an unperturbed eigenvalue.
GridFn2 green0_apply(const BoundaryForm& bf, Cx lambda, const GridFn2& f);

// Operator-norm estimates ||R0(a + i tau)||_{p -> q} along a vertical line,
// probed with seeded random trigonometric polynomials and ramps.
struct ScanPoint {
  double tau;
  double norm_estimate;
};
std::vector<ScanPoint> resolvent0_norm_scan(const BoundaryForm& bf,
                                            double re_anchor,
                                            std::span<const double> taus,
                                            double p, double q, int n_probes,
                                            std::uint64_t seed,
                                            const GridPtr& grid);

// Boundary form of the adjoint operator: rows spanning the annihilator of
// ker[A | B] under the boundary bracket [y, z] (the Lagrange boundary term).
BoundaryForm adjoint_boundary_form(const BoundaryForm& bf);

}  // namespace dirac
