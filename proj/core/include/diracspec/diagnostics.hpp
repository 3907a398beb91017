#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "diracspec/grid.hpp"
#include "diracspec/spectrum.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// Per-comparison-point data for the eigenvalue localization inequality
// dev_n^e <= r_n, r_n the crossing radius of the oscillatory-remainder bound
// against the determinant lower bound (e = 1 when the spectrum splits into
// two simple series, e = 2 otherwise).
struct AsymptoticsRow {
  long n = 0;
  Cx lambda{};
  Cx anchor{};
  double dev = 0.0;    // |lambda - anchor|
  double s_eps = 0.0;  // max over the disk of Ups(pi) + ||Ups||_{p'}
  double c1 = 0.0;     // min over the disk boundary of |Delta0| / eps
  double c2 = 0.0;     // min over the disk boundary of |Delta0| / eps^2
  double r_n = 0.0;    // smallest sampled radius where c r / M >= s(r)
  bool resolved = false;
  bool inequality_ok = false;  // dev^e <= r_n
};

struct AsymptoticsOptions {
  double epsilon = 0.4;  // comparison disk radius
  double alpha = 1.0;    // strip half-width for the remainder functionals
  GridPtr profile_grid;  // grid for the oscillatory integrals (default 512 cells)
  LocalizeOptions localize;
};

struct AsymptoticsReport {
  std::vector<AsymptoticsRow> rows;  // sorted by n
  double epsilon = 0.0;
  bool two_simple_series = true;  // which inequality variant applies
  double c_global = 0.0;          // min over rows of c1 (or c2)
  double fitted_M = 0.0;          // max over rows of dev^e c_global / s_eps
  double p_conj = 2.0;
  // Cumulative l^{p'} partial sums in |n| order.
  std::vector<double> tail_s, tail_dev;
};

// Compares localized eigenvalues with their comparison points and evaluates
// the remainder-functional radii over sampled disks (48 boundary + 17
// interior points per disk, on the trace-normalized potential).
AsymptoticsReport asymptotics_report(const SpectralProblem& p, long n_min,
                                     long n_max,
                                     const AsymptoticsOptions& opts = {});

struct EigenfunctionRow {
  long n = 0;
  Cx lambda{};
  double b_n = 0.0;    // ||y_n - W y_n^0||_{p'} after scaling and alignment
  double align = 0.0;  // |<y_n, W y_n^0>| / (||y_n|| ||W y_n^0||)
  bool skipped = false;  // multiplicity-2 disks are not compared
};

struct EigenfunctionReport {
  std::vector<EigenfunctionRow> rows;  // sorted by n
  double p_conj = 2.0;
  std::vector<double> tail;  // cumulative l^{p'} sums, |n| order, skips excluded
  bool complete = true;
};

// Distance of each eigenfunction from the weighted unperturbed model
// model_prefactor * W(x) R(d(x)) y_n^0(x), where R is the rotation by the
// secular phase d(x) = -(1/2) int_0^x (q1 + q4) (the identity for
// trace-normalized potentials): the eigenfunction is rescaled so its
// coefficient vector in the fundamental pair matches the model's, then
// phase-aligned by projection. Run on the adjoint problem this measures the
// adjoint counterpart (the sampled weight and drift of the adjoint potential
// are automatically the reciprocal/conjugate ones). model_prefactor != 1
// exists for comparing alternative weight normalizations; 1 is the
// consistent choice.
EigenfunctionReport eigenfunction_asymptotics(
    const SpectralProblem& p, std::span<const SpectralPoint> points,
    double model_prefactor = 1.0);

struct BasisOptions {
  bool bracket = false;  // orthonormalize coinciding-anchor clusters first
  int n_probes = 32;
  std::uint64_t seed = 1;
  LocalizeOptions localize;
};

struct BasisReport {
  int N = 0;
  bool bracket_mode = false;
  int count = 0;           // basis functions collected
  double gram_cond = 0.0;  // condition number of the (block-)Gram matrix
  double biorth_max_err = 0.0;  // max off-diagonal |<y_n, z_m>| after rescale
  double alpha_min = 0.0;  // range of |<y_n, z_n>| before rescale
  double alpha_max = 0.0;
  double bessel_const = 0.0;  // max over probes of sum |<f, y_n>|^2 / ||f||^2
  bool complete = true;
};

// Riesz-basis diagnostics over indices |n| <= N: Gram condition number,
// biorthogonality against the adjoint system, Bessel constant over seeded
// probe functions (24 trigonometric polynomials of degree <= 2N plus 8 step
// functions). In bracket mode eigenfunctions sharing a disk are
// orthonormalized internally before the Gram matrix is formed.
BasisReport basis_report(const SpectralProblem& p, int N,
                         const BasisOptions& opts = {});

struct KadecCheck {
  double constant = 0.0;       // max over probes of the normalized moment sum
  double sup_deviation = 0.0;  // sup_j |lambda_j - 2 n_j|
  double bound = 0.0;          // 1/(2p)
  std::vector<double> per_probe;
};

// Empirical Bessel constant of the exponential system {e^{i lambda_j x}} on
// [0, pi]: max over probes f of (sum_j |int f e^{i lambda_j x}|^{p'})^{1/p'}
// divided by ||f||_p. Requires sup_j |lambda_j - 2 n_j| < 1/(2p); throws
// DomainError naming the offending index otherwise.
KadecCheck bessel_kadec_check(std::span<const long> ns,
                              std::span<const Cx> lambdas, double p,
                              int n_probes, std::uint64_t seed,
                              const GridPtr& grid);

}  // namespace dirac
