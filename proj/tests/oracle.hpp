#pragma once

// Independent finite-difference eigenvalue oracle for cross-checking the
// analytic machinery.  Discretizes -B y' + Q y = lambda y with high-order
// centered stencils and solves the resulting generalized eigenproblem with
// LAPACK's zggev.  Deliberately shares no code with the library solvers.

#include <complex>
#include <vector>

#include "diracspec/potential.hpp"
#include "diracspec/boundary.hpp"

namespace oracle {

struct FdOptions {
    int n_points = 448;   // grid points per component
    int order = 8;        // stencil order (even)
};

// All finite eigenvalues of the discretized pencil, sorted by (Re, Im).
std::vector<std::complex<double>> fd_eigenvalues(const dirac::Potential& Q,
                                                 const dirac::BoundaryForm& bc,
                                                 const FdOptions& opts = {});

// Eigenvalues within |Im| <= im_cap and Re in [re_lo, re_hi], sorted by Re.
std::vector<std::complex<double>> fd_window(const dirac::Potential& Q,
                                            const dirac::BoundaryForm& bc,
                                            double re_lo, double re_hi,
                                            double im_cap,
                                            const FdOptions& opts = {});

}  // namespace oracle
