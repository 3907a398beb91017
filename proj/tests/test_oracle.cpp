#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "diracspec/boundary.hpp"
#include "diracspec/grid.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/spectrum.hpp"
#include "oracle.hpp"

using namespace dirac;

namespace {

// Match each determinant-based eigenvalue to the nearest oracle eigenvalue.
double max_match_dist(const std::vector<SpectralPoint>& pts,
                      const std::vector<Cx>& oracle_vals) {
  double worst = 0.0;
  for (const auto& pt : pts) {
    double best = 1e300;
    for (Cx z : oracle_vals) best = std::min(best, std::abs(z - pt.lambda));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("matrix discretization confirms the smooth dirichlet spectrum") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.2*cos(x)");
  Q.q2 = ScalarCoef::expression("0.3*sin(x)");
  Q.q3 = ScalarCoef::expression("0.3*sin(x)");
  SpectralProblem p(Q, dirichlet_form(), Grid::make(256));
  const auto pts = localize(p, -6, 6);
  REQUIRE(pts.size() == 13);
  oracle::FdOptions opts;
  opts.n_points = 320;
  const auto fd = oracle::fd_window(Q, dirichlet_form(), -6.8, 6.8, 1.0, opts);
  REQUIRE(fd.size() >= pts.size());
  CHECK(max_match_dist(pts, fd) < 1e-6);
}

TEST_CASE("matrix discretization confirms a complex non-selfadjoint spectrum") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1*cos(x) + 0.05*i*sin(2*x)");
  Q.q2 = ScalarCoef::expression("0.2*sin(x) + 0.1*i");
  Q.q3 = ScalarCoef::expression("0.1*cos(2*x)");
  SpectralProblem p(Q, dirichlet_neumann_form(), Grid::make(256));
  const auto pts = localize(p, -5, 5);
  REQUIRE(pts.size() == 11);
  oracle::FdOptions opts;
  opts.n_points = 320;
  const auto fd =
      oracle::fd_window(Q, dirichlet_neumann_form(), -6.4, 6.4, 1.0, opts);
  REQUIRE(fd.size() >= pts.size());
  CHECK(max_match_dist(pts, fd) < 1e-6);
}

TEST_CASE("matrix discretization confirms split periodic pairs") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1*cos(x) + 0.05*i*sin(2*x)");
  Q.q2 = ScalarCoef::expression("0.2*sin(x) + 0.1*i*cos(x)");
  Q.q3 = ScalarCoef::expression("0.2*sin(x) + 0.1*i*cos(x)");
  SpectralProblem p(Q, periodic_form(), Grid::make(256));
  const auto pts = localize(p, -2, 2);
  int mult_total = 0;
  for (const auto& pt : pts) mult_total += pt.multiplicity;
  REQUIRE(mult_total == 10);
  oracle::FdOptions opts;
  opts.n_points = 320;
  const auto fd = oracle::fd_window(Q, periodic_form(), -4.6, 4.6, 1.0, opts);
  REQUIRE(int(fd.size()) >= int(pts.size()));
  CHECK(max_match_dist(pts, fd) < 1e-6);
}
