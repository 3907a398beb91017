#pragma once

#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "diracspec/grid.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/types.hpp"

namespace dirac {

enum class OdeMethod { CF4, RK45 };

struct SolveOptions {
  OdeMethod method = OdeMethod::CF4;
  double tol = 1e-10;   // target accuracy of the fundamental matrix at pi
  int min_cells = 256;  // CF4 resolution floor
  int max_cells = 32768;
};

// Fundamental pair of -B y' + Q y = lambda y: columns c (c(0) = (1,0)) and
// s (s(0) = (0,1)). In first-order form y' = (lambda B + V) y with
// V = [[-q3, -q4], [q1, q2]].
struct FundamentalPair {
  GridPtr grid;
  Cx lambda;
  GridFn2 c, s;
  Mat2 end;             // [c | s] at pi
  double err_estimate;  // Richardson estimate of the endpoint error
};

// Integrates the system for one potential, caching potential samples at the
// integrator nodes across lambda values. Thread-safe for concurrent solves.
class DiracSolver {
 public:
  explicit DiracSolver(Potential Q);

  const Potential& potential() const { return Q_; }

  // Fundamental matrix [c | s] at pi. Cell count is chosen from |lambda| and
  // tol (4th-order commutator-free Magnus scheme, closed-form cell flows).
  Mat2 end_matrix(Cx lambda, double tol = 1e-10) const;
  // Same with a Richardson error estimate (runs a second, coarser pass).
  Mat2 end_matrix_checked(Cx lambda, double tol, double& err_estimate) const;

  // Dense fundamental pair on the given grid (one Magnus step per node gap).
  FundamentalPair dense_pair(Cx lambda, const GridPtr& grid) const;

  // Dense single solution with initial value y0.
  GridFn2 solve_ivp(Cx lambda, Vec2 y0, const GridPtr& grid) const;

  // Adaptive Dormand-Prince endpoint solve (cross-validation method).
  Mat2 end_matrix_rk45(Cx lambda, double tol = 1e-10) const;

  int cells_for(Cx lambda, double tol) const;

 private:
  struct CellTable {
    std::vector<double> edges;
    std::vector<Mat2> V1, V2;  // potential part at the two Gauss points
  };
  const CellTable& table(int n_cells) const;
  Mat2 v_matrix(double x) const;

  Potential Q_;
  bool zero_;
  mutable std::mutex mu_;
  mutable std::map<int, CellTable> cache_;
};

// Oscillatory prefix integrals controlling the distance of c, s from the
// weighted rotation: ups1 = int q1 sin(2 lambda t), ups2 = int q1 cos(2 lambda t),
// ups3 = int (q2+q3)/2 sin(2 lambda t), ups4 = int (q2+q3)/2 cos(2 lambda t),
// Ups = |ups1|+|ups2|+|ups3|+|ups4| pointwise.
struct RemainderProfile {
  GridPtr grid;
  Cx lambda;
  GridFn1 ups1, ups2, ups3, ups4;
  GridFn1 Ups;
  double Ups_sup = 0.0;      // sup over [0, pi]
  double Ups_pprime = 0.0;   // L^{p'} norm in x
  double k_const = 0.0;      // 2 + 12 R cosh(2 pi alpha + 1)
  double threshold = 0.0;    // 1 / (8 k^4)
  bool in_strip = false;     // |Im lambda| <= alpha
  bool in_domain = false;    // in_strip and Ups_sup < threshold
};

RemainderProfile remainder_profile(const SampledPotential& sp, double R,
                                   double p_conj, double alpha, Cx lambda);

// Polar representation of one fundamental solution via the angle equation
//   theta' = lambda + q1 cos(2 theta) - (q2+q3)/2 sin(2 theta)   (s-type)
// solved as a fixed point of eta -> F(eta), eta = theta - lambda x; the
// c-type solution uses the same engine with (q1, q2+q3) negated.
enum class PrueferKind { SType, CType };

struct PrueferSolution {
  GridPtr grid;
  Cx lambda;
  PrueferKind kind;
  GridFn1 theta, r;     // y = (r sin theta, r cos theta) for s-type,
                        // y = (r cos theta, -r sin theta) for c-type
  GridFn1 eta;          // theta - lambda x
  GridFn1 rho;          // r / W - 1
  GridFn2 y;            // the reconstructed solution
  int iterations = 0;
  double contraction_factor = 0.0;  // measured on the preconditioned map
  double contraction_bound = 0.0;   // 2 k^4 Ups_{p'}
  double step_norm = 0.0;           // final fixed-point update size
  bool used_fallback = false;
};

// Throws DomainError when lambda lies outside the validity region
// (|Im lambda| <= alpha and sup Ups < 1/(8 k^4)).
PrueferSolution pruefer_solve(const SampledPotential& sp, double R,
                              double p_conj, double alpha, Cx lambda,
                              PrueferKind kind = PrueferKind::SType);

}  // namespace dirac
