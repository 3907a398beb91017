#pragma once

#include <vector>

#include "diracspec/boundary.hpp"
#include "diracspec/grid.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/solutions.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// A potential + boundary form + shared grid, with the derived data needed
// for spectral work precomputed once.
class SpectralProblem {
 public:
  SpectralProblem(Potential Q, BoundaryForm bc, GridPtr grid,
                  SolveOptions solve = {});

  const Potential& Q() const { return Q_; }
  const BoundaryForm& bc() const { return bc_; }
  const GridPtr& grid() const { return grid_; }
  const SolveOptions& solve_options() const { return solve_; }
  const SampledPotential& sampled() const { return sampled_; }
  const DiracSolver& solver() const { return solver_; }
  Cx W_end() const { return W_end_; }
  // Mean of tr Q / 2: the spectral shift of the trace normalization.
  Cx shift() const { return shift_; }
  const BoundaryForm& assoc_form() const { return assoc_; }
  const Classification& classification() const { return cls_; }
  const UnperturbedSpectrum& spec0() const { return spec0_; }

  // Characteristic determinant det[U_i applied to the fundamental pair].
  Cx char_det(Cx lambda, double tol = 1e-10) const;
  // Unperturbed comparison determinant of the associated problem.
  Cx char_det0(Cx lambda) const;
  // n-th comparison point: shift + n-th zero of the comparison determinant.
  Cx anchor(long n) const;
  int anchor_multiplicity(long n) const;

 private:
  Potential Q_;
  BoundaryForm bc_;
  GridPtr grid_;
  SolveOptions solve_;
  SampledPotential sampled_;
  DiracSolver solver_;
  Cx W_end_{};
  Cx shift_{};
  BoundaryForm assoc_{};
  Classification cls_{};
  UnperturbedSpectrum spec0_{};
};

SpectralProblem adjoint_problem(const SpectralProblem& p);

struct LocalizeOptions {
  double radius = 0.4;         // disk radius around each anchor
  int winding_samples = 256;   // initial contour samples (power of two)
  int max_winding_samples = 4096;
  double winding_tol = 1e-3;   // distance to an integer winding number
  double refine_tol = 1e-10;   // |Delta| target relative to the circle max
  double scan_ode_tol = 1e-8;  // determinant accuracy on contours
  double refine_ode_tol = 1e-12;
};

struct SpectralPoint {
  long n = 0;
  Cx lambda{};
  Cx anchor{};
  int multiplicity = 1;   // zeros sharing this disk
  double radius = 0.0;    // disk radius that isolated the zero(s)
  double winding = 0.0;   // measured winding number of the disk
  double det_residual = 0.0;  // |Delta(lambda)| / max contour |Delta|
  bool refined = false;
};

// Locate eigenvalues near the anchors n_min..n_max by contour counting and
// root refinement. Coinciding anchors are handled as one disk of the summed
// multiplicity. Throws NumericError when a consistent winding count cannot
// be established.
std::vector<SpectralPoint> localize(const SpectralProblem& p, long n_min,
                                    long n_max, const LocalizeOptions& = {});

struct CountCheck {
  long contour_count = 0;
  long anchor_count = 0;
  bool consistent = false;
  double min_boundary_det = 0.0;
  double re_lo = 0.0, re_hi = 0.0, im_bound = 0.0;
};

// Winding count over the rectangle (re_lo, re_hi) x (-im, im) compared with
// the number of anchors inside. The rectangle height is inflated when the
// determinant is too small on the contour.
CountCheck global_count_check(const SpectralProblem& p, double re_lo,
                              double re_hi, double im_bound,
                              const LocalizeOptions& = {});

struct Eigenpair {
  Cx lambda{};
  Vec2 gamma{};        // y = gamma.a c + gamma.b s, ||y||_2 = 1
  GridFn2 y;
  double residual = 0.0;     // L2 norm of (-B y' + Q y - lambda y)
  double bc_residual = 0.0;  // |U(y)| relative to the boundary matrix scale
  int geometric_multiplicity = 1;
};

// Eigenfunction basis at lambda (size 1, or 2 when the boundary matrix
// vanishes). Throws NumericError if lambda is not an eigenvalue.
std::vector<Eigenpair> eigenfunctions(const SpectralProblem& p, Cx lambda);

}  // namespace dirac
