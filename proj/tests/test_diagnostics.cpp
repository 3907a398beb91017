#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "diracspec/boundary.hpp"
#include "diracspec/diagnostics.hpp"
#include "diracspec/grid.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/spectrum.hpp"

using namespace dirac;

namespace {

Potential smooth_potential() {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.2*cos(x)");
  Q.q2 = ScalarCoef::expression("0.3*sin(x)");
  Q.q3 = ScalarCoef::expression("0.3*sin(x)");
  return Q;
}

Potential complex_potential() {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1*cos(x) + 0.05*i*sin(2*x)");
  Q.q2 = ScalarCoef::expression("0.2*sin(x) + 0.1*i");
  Q.q3 = ScalarCoef::expression("0.1*cos(2*x)");
  return Q;
}

}  // namespace

TEST_CASE("deviation report bounds the drift for a smooth potential") {
  SpectralProblem p(smooth_potential(), dirichlet_form(), Grid::make(256));
  const auto rep = asymptotics_report(p, -8, 8);
  REQUIRE(rep.rows.size() == 17);
  CHECK(rep.two_simple_series);
  CHECK(rep.c_global > 0.0);
  CHECK(rep.fitted_M > 0.0);
  for (const auto& row : rep.rows) {
    CHECK(row.s_eps > 0.0);
    if (row.resolved) CHECK(row.inequality_ok);
  }
  // Rows are ordered by index and the remainder size decays with |n|.
  for (size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].n == rep.rows[i - 1].n + 1);
  const auto& mid = rep.rows[8];   // n = 0
  const auto& end = rep.rows[16];  // n = 8
  CHECK(end.s_eps < mid.s_eps);
  CHECK(end.dev < mid.dev + 0.05);
}

TEST_CASE("deviation tails are cumulative and ordered by absolute index") {
  SpectralProblem p(smooth_potential(), dirichlet_form(), Grid::make(256));
  const auto rep = asymptotics_report(p, -5, 5);
  REQUIRE(rep.tail_s.size() == rep.rows.size());
  REQUIRE(rep.tail_dev.size() == rep.rows.size());
  for (size_t i = 1; i < rep.tail_s.size(); ++i) {
    CHECK(rep.tail_s[i] >= rep.tail_s[i - 1] - 1e-15);
    CHECK(rep.tail_dev[i] >= rep.tail_dev[i - 1] - 1e-15);
  }
}

TEST_CASE("eigenfunction comparison aligns computed modes with their model") {
  SpectralProblem p(smooth_potential(), dirichlet_form(), Grid::make(256));
  const auto pts = localize(p, -6, 6);
  const auto rep = eigenfunction_asymptotics(p, pts);
  REQUIRE(rep.complete);
  REQUIRE(rep.rows.size() == pts.size());
  double b1 = 0.0, b6 = 0.0;
  for (const auto& row : rep.rows) {
    CHECK(!row.skipped);
    CHECK(row.b_n < 1.0);
    if (std::abs(row.n) == 1) b1 = std::max(b1, row.b_n);
    if (std::abs(row.n) == 6) b6 = std::max(b6, row.b_n);
  }
  CHECK(b6 < b1);
  CHECK(rep.p_conj == doctest::Approx(2.0));
}

TEST_CASE("orthonormal unperturbed system yields a unit gram matrix") {
  SpectralProblem p(Potential{}, dirichlet_form(), Grid::make(128));
  const auto rep = basis_report(p, 5);
  CHECK(rep.complete);
  CHECK(rep.count == 11);
  CHECK(rep.gram_cond < 1.0 + 1e-9);
  CHECK(rep.biorth_max_err < 1e-10);
  // Bessel constant of an orthonormal family is at most 1.
  CHECK(rep.bessel_const < 1.0 + 1e-9);
  CHECK(rep.alpha_min > 0.9);
}

TEST_CASE("perturbed riesz diagnostics stay within expected ranges") {
  SpectralProblem p(complex_potential(), dirichlet_form(), Grid::make(256));
  const auto rep = basis_report(p, 6);
  CHECK(rep.complete);
  CHECK(rep.count == 13);
  CHECK(rep.gram_cond < 3.0);
  CHECK(rep.biorth_max_err < 1e-6);
  CHECK(rep.alpha_min > 0.1);
  CHECK(rep.bessel_const < 3.0);
}

TEST_CASE("bracketed diagnostics group clustered periodic eigenvalues") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1*cos(x) + 0.05*i*sin(2*x)");
  Q.q2 = ScalarCoef::expression("0.2*sin(x) + 0.1*i*cos(x)");
  Q.q3 = ScalarCoef::expression("0.2*sin(x) + 0.1*i*cos(x)");
  SpectralProblem p(Q, periodic_form(), Grid::make(256));
  BasisOptions opts;
  opts.bracket = true;
  const auto rep = basis_report(p, 3, opts);
  CHECK(rep.complete);
  CHECK(rep.bracket_mode);
  // Indices -3..3 enumerate with multiplicity: 7 basis functions spanning
  // the four double anchors -2, 0, 2, 4 (the last pair cut by the range).
  CHECK(rep.count == 7);
  CHECK(rep.gram_cond < 10.0);
}

TEST_CASE("lattice deviation check accepts small deviations and freezes the constant") {
  auto grid = Grid::make(256);
  std::vector<long> ns;
  std::vector<Cx> lambdas;
  for (long n = -3; n <= 3; ++n) {
    ns.push_back(n);
    lambdas.push_back(Cx(2.0 * double(n), 0.0));
  }
  const auto kc = bessel_kadec_check(ns, lambdas, 2.0, 12, 1, grid);
  CHECK(kc.sup_deviation == doctest::Approx(0.0));
  CHECK(kc.bound == doctest::Approx(0.25));
  // For the exact doubled lattice the system {e^{2inx}} is orthogonal with
  // norm sqrt(pi), so no probe ratio exceeds sqrt(pi).
  CHECK(kc.constant <= std::sqrt(PI) + 1e-9);
  CHECK(kc.constant > 0.2);
}

TEST_CASE("lattice deviation check rejects out-of-bound deviations") {
  auto grid = Grid::make(64);
  std::vector<long> ns = {0, 1};
  std::vector<Cx> lambdas = {Cx(0.0, 0.0), Cx(2.3, 0.0)};  // dev 0.3 > 1/4
  CHECK_THROWS_AS(bessel_kadec_check(ns, lambdas, 2.0, 4, 1, grid),
                  DomainError);
}

TEST_CASE("lattice deviation check covers the endpoint exponent") {
  // p = 1 means the conjugate exponent is infinite: the numerator becomes a
  // sup over the family and the admissible deviation bound is 1/2.
  auto grid = Grid::make(128);
  std::vector<long> ns;
  std::vector<Cx> lambdas;
  for (long n = -2; n <= 2; ++n) {
    ns.push_back(n);
    lambdas.push_back(Cx(2.0 * double(n) + 0.1, 0.0));
  }
  const auto kc = bessel_kadec_check(ns, lambdas, 1.0, 6, 3, grid);
  CHECK(kc.bound == doctest::Approx(0.5));
  CHECK(kc.sup_deviation == doctest::Approx(0.1));
  CHECK(kc.constant > 0.0);
}

TEST_CASE("trace normalization cancels the mean and keeps the weight") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1 + 0.2*cos(x)");
  Q.q2 = ScalarCoef::expression("0.15*sin(x)");
  Q.q3 = ScalarCoef::expression("0.1*cos(x)");
  Q.q4 = ScalarCoef::expression("0.05 + 0.1*sin(2*x)");
  const auto np = normalize_trace(Q);
  // shift = (1/2pi) int tr Q = (0.1 pi + 0.05 pi) / (2 pi).
  CHECK(std::abs(np.shift - Cx(0.075, 0.0)) < 1e-10);
  // The normalized trace integrates to zero.
  Potential R = np.Q;
  const Cx tr = coef_integral(R.q1, 0.0, PI) + coef_integral(R.q4, 0.0, PI);
  CHECK(std::abs(tr - 2.0 * PI * 0.0) < 1e-9);
  // q2 - q3 is untouched, so the weight is identical.
  CHECK(std::abs(weight_end(R) - weight_end(Q)) < 1e-10);
  // The gauge angle closes up at both ends.
  CHECK(std::abs(np.phi(0.0)) < 1e-12);
  CHECK(std::abs(np.phi(PI)) < 1e-9);
}

TEST_CASE("normalized problem spectrum is the shifted original spectrum") {
  Potential Q;
  Q.q1 = ScalarCoef::expression("0.1 + 0.2*cos(x)");
  Q.q2 = ScalarCoef::expression("0.15*sin(x)");
  Q.q3 = ScalarCoef::expression("0.1*cos(x)");
  const auto np = normalize_trace(Q);
  SpectralProblem p(Q, dirichlet_form(), Grid::make(256));
  SpectralProblem pn(np.Q, dirichlet_form(), Grid::make(256));
  const auto orig = localize(p, -4, 4);
  const auto norm = localize(pn, -4, 4);
  REQUIRE(orig.size() == norm.size());
  for (size_t i = 0; i < orig.size(); ++i)
    CHECK(std::abs(orig[i].lambda - (norm[i].lambda + np.shift)) < 1e-8);
}
