#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <complex>
#include <vector>

#include "diracspec/boundary.hpp"
#include "diracspec/grid.hpp"
#include "diracspec/potential.hpp"
#include "diracspec/rng.hpp"
#include "diracspec/types.hpp"

using namespace dirac;

namespace {

// Smallest distance from z to the set {targets}.
double set_dist(Cx z, const std::vector<Cx>& targets) {
  double d = 1e300;
  for (Cx t : targets) d = std::min(d, std::abs(z - t));
  return d;
}

}  // namespace

TEST_CASE("dirichlet conditions classify as strongly regular with unit witnesses") {
  const auto cls = classify(dirichlet_form(), Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::StronglyRegular);
  CHECK(std::abs(cls.a - Cx(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(cls.abar - Cx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(cls.b) < 1e-15);
  CHECK(std::abs(cls.disc - Cx(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("dirichlet-neumann conditions classify as strongly regular") {
  const auto cls = classify(dirichlet_neumann_form(), Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::StronglyRegular);
  CHECK(std::abs(cls.a - Cx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(cls.abar - Cx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(cls.b) < 1e-15);
}

TEST_CASE("periodic conditions are regular but not strongly regular") {
  const auto cls = classify(periodic_form(), Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::RegularNotStrong);
  CHECK(std::abs(cls.disc) < 1e-15);
  CHECK(std::abs(cls.a) > 0.5);
  const auto cls2 = classify(antiperiodic_form(), Cx(1.0, 0.0));
  CHECK(cls2.kind == BoundaryClass::RegularNotStrong);
}

TEST_CASE("quasiperiodic conditions are strongly regular off the degenerate angles") {
  const auto cls = classify(quasiperiodic_form(0.7), Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::StronglyRegular);
}

TEST_CASE("initial conditions yield an empty spectrum") {
  // U(y) = y(0): a = abar = 0 with b != 0, so the determinant is a nonzero
  // constant and no eigenvalues exist.
  BoundaryForm bf;
  bf.A = Mat2::identity();
  bf.B = {0.0, 0.0, 0.0, 0.0};
  const auto cls = classify(bf, Cx(1.0, 0.0));
  CHECK(std::abs(cls.a) < 1e-15);
  CHECK(std::abs(cls.abar) < 1e-15);
  CHECK(std::abs(cls.b) > 0.5);
  const auto sp = unperturbed_spectrum(bf, Cx(1.0, 0.0));
  CHECK(sp.kind == SpectrumKind::Empty);
}

TEST_CASE("rank-one-type conditions degenerate to the whole plane") {
  // U1 = y1(0) + i y2(0), U2 = y1(pi) + i y2(pi): all three invariants
  // vanish and the determinant is identically zero.
  BoundaryForm bf;
  bf.A = {1.0, Cx(0.0, 1.0), 0.0, 0.0};
  bf.B = {0.0, 0.0, 1.0, Cx(0.0, 1.0)};
  const auto cls = classify(bf, Cx(1.0, 0.0));
  CHECK(cls.kind == BoundaryClass::Degenerate);
  const auto sp = unperturbed_spectrum(bf, Cx(1.0, 0.0));
  CHECK(sp.kind == SpectrumKind::WholePlane);
  for (double t : {0.3, 1.9, 4.4})
    CHECK(std::abs(delta0(bf, Cx(1.0, 0.0), Cx(t, 0.5))) < 1e-12);
}

TEST_CASE("unperturbed series: dirichlet integers, dn half-integers") {
  const auto spD = unperturbed_spectrum(dirichlet_form(), Cx(1.0, 0.0));
  REQUIRE(spD.kind == SpectrumKind::TwoSeries);
  for (long n = -40; n <= 40; ++n) {
    CHECK(std::abs(spD.lambda0(n) - Cx(double(n), 0.0)) < 1e-12);
    CHECK(spD.multiplicity(n) == 1);
  }
  const auto spN = unperturbed_spectrum(dirichlet_neumann_form(), Cx(1.0, 0.0));
  REQUIRE(spN.kind == SpectrumKind::TwoSeries);
  for (long n = -8; n <= 8; ++n) {
    const Cx l = spN.lambda0(n);
    const double frac = l.real() - std::floor(l.real());
    CHECK(std::abs(l.imag()) < 1e-12);
    CHECK(std::abs(frac - 0.5) < 1e-12);
    CHECK(spN.multiplicity(n) == 1);
  }
  // Consecutive indices move monotonically.
  for (long n = -8; n < 8; ++n)
    CHECK(spN.lambda0(n + 1).real() > spN.lambda0(n).real() + 0.4);
}

TEST_CASE("unperturbed series: periodic and antiperiodic double lattices") {
  // Enumeration counts multiplicity: each lattice point of 2Z (periodic) or
  // 2Z+1 (antiperiodic) is hit by exactly two consecutive indices.
  auto check_lattice = [](const UnperturbedSpectrum& sp, long parity) {
    std::map<long, int> hits;
    for (long n = -6; n <= 6; ++n) {
      const Cx l = sp.lambda0(n);
      CHECK(sp.multiplicity(n) == 2);
      CHECK(std::abs(l.imag()) < 1e-12);
      const long r = std::lround(l.real());
      CHECK(std::abs(l.real() - double(r)) < 1e-12);
      CHECK(((r % 2) + 2) % 2 == parity);
      hits[r]++;
    }
    // Interior lattice points are enumerated exactly twice.
    for (const auto& [pt, cnt] : hits)
      if (pt > -6 + 1 && pt < 6 - 1) CHECK(cnt == 2);
  };
  check_lattice(unperturbed_spectrum(periodic_form(), Cx(1.0, 0.0)), 0);
  check_lattice(unperturbed_spectrum(antiperiodic_form(), Cx(1.0, 0.0)), 1);
}

TEST_CASE("unperturbed series: quasiperiodic splits into two shifted lattices") {
  const double al = 0.7;
  const auto sp = unperturbed_spectrum(quasiperiodic_form(al), Cx(1.0, 0.0));
  REQUIRE(sp.kind == SpectrumKind::TwoSeries);
  // e^{i pi lambda} = e^{+- i al} means lambda in (al/pi + 2Z) U (-al/pi + 2Z).
  for (long n = -7; n <= 7; ++n) {
    const Cx l = sp.lambda0(n);
    CHECK(sp.multiplicity(n) == 1);
    const double r = l.real();
    const double m1 = std::abs(std::remainder(r - al / PI, 2.0));
    const double m2 = std::abs(std::remainder(r + al / PI, 2.0));
    CHECK(std::min(m1, m2) < 1e-12);
    CHECK(std::abs(delta0(quasiperiodic_form(al), Cx(1.0, 0.0), l)) < 1e-12);
  }
}

TEST_CASE("series roots are zeros of the closed-form determinant") {
  for (const BoundaryForm& bf : {dirichlet_form(), dirichlet_neumann_form(),
                                 periodic_form(), quasiperiodic_form(1.1)}) {
    const auto sp = unperturbed_spectrum(bf, Cx(1.0, 0.0));
    for (long n = -5; n <= 5; ++n) {
      CHECK(std::abs(delta0(bf, Cx(1.0, 0.0), sp.lambda0(n))) < 1e-12);
      // Midpoints between distinct consecutive eigenvalues are not zeros
      // (consecutive indices coincide at a double eigenvalue - skip those).
      if (std::abs(sp.lambda0(n + 1) - sp.lambda0(n)) < 1e-9) continue;
      const Cx mid = 0.5 * (sp.lambda0(n) + sp.lambda0(n + 1));
      CHECK(std::abs(delta0(bf, Cx(1.0, 0.0), mid)) > 1e-3);
    }
  }
}

TEST_CASE("closed-form determinant matches the endpoint-matrix determinant") {
  // det(A + B Y0(pi)) equals the minor expansion for the zero potential.
  Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    BoundaryForm bf;
    bf.A = {rng.complex_in_disk(), rng.complex_in_disk(), rng.complex_in_disk(),
            rng.complex_in_disk()};
    bf.B = {rng.complex_in_disk(), rng.complex_in_disk(), rng.complex_in_disk(),
            rng.complex_in_disk()};
    if (!bf.full_rank()) continue;
    for (Cx lam : {Cx(0.8, 0.0), Cx(5.5, 0.7), Cx(-3.2, -0.5)}) {
      const Cx d1 = M0_matrix(bf, lam).det();
      const Cx d2 = delta0(bf, Cx(1.0, 0.0), lam);
      CHECK(std::abs(d1 - d2) < 1e-12 * (1.0 + std::abs(d1)));
    }
  }
}

TEST_CASE("weighted associated form keeps the determinant zeros") {
  // For W != 1 the associated form scales the endpoint block; its
  // unperturbed spectrum is what the perturbed eigenvalues track.
  const Cx W(1.3, 0.25);
  for (const BoundaryForm& bf :
       {dirichlet_form(), dirichlet_neumann_form(), quasiperiodic_form(0.9)}) {
    const BoundaryForm af = associated_form(bf, W);
    const auto spw = unperturbed_spectrum(bf, W);
    const auto spa = unperturbed_spectrum(af, Cx(1.0, 0.0));
    REQUIRE(spw.kind == spa.kind);
    for (long n = -4; n <= 4; ++n)
      CHECK(std::abs(spw.lambda0(n) - spa.lambda0(n)) < 1e-12);
  }
}

TEST_CASE("lagrange bracket pairs a boundary form with its adjoint form") {
  // For y in ker U and z in ker U*, the boundary bracket
  // (y1 conj(z2) - y2 conj(z1))(pi) - (y1 conj(z2) - y2 conj(z1))(0)
  // vanishes. This is the defining property of the adjoint form.
  Rng rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    BoundaryForm bf;
    do {
      bf.A = {rng.complex_in_disk(), rng.complex_in_disk(),
              rng.complex_in_disk(), rng.complex_in_disk()};
      bf.B = {rng.complex_in_disk(), rng.complex_in_disk(),
              rng.complex_in_disk(), rng.complex_in_disk()};
    } while (!bf.full_rank());
    const BoundaryForm ad = adjoint_boundary_form(bf);
    CHECK(ad.full_rank());

    // Kernel bases: yhat = (y(0), y(pi)) with A y(0) + B y(pi) = 0.
    auto kernel_pairs = [](const BoundaryForm& f) {
      // Two independent solutions of the 2x4 system [A | B] yhat = 0 by
      // Gaussian elimination on the stacked matrix.
      std::vector<std::array<Cx, 4>> rows = {
          {f.A.m11, f.A.m12, f.B.m11, f.B.m12},
          {f.A.m21, f.A.m22, f.B.m21, f.B.m22}};
      // Reduce.
      int lead0 = 0;
      double best = 0.0;
      for (int j = 0; j < 4; ++j)
        if (std::abs(rows[0][j]) > best) best = std::abs(rows[0][j]), lead0 = j;
      for (int j = 0; j < 4; ++j)
        if (j != lead0) rows[0][j] /= rows[0][lead0];
      rows[0][lead0] = 1.0;
      const Cx r = rows[1][lead0];
      for (int j = 0; j < 4; ++j) rows[1][j] -= r * rows[0][j];
      int lead1 = -1;
      best = 0.0;
      for (int j = 0; j < 4; ++j)
        if (j != lead0 && std::abs(rows[1][j]) > best)
          best = std::abs(rows[1][j]), lead1 = j;
      for (int j = 0; j < 4; ++j)
        if (j != lead1) rows[1][j] /= rows[1][lead1];
      rows[1][lead1] = 1.0;
      const Cx r2 = rows[0][lead1];
      for (int j = 0; j < 4; ++j) rows[0][j] -= r2 * rows[1][j];

      std::vector<std::array<Cx, 4>> basis;
      for (int jf = 0; jf < 4; ++jf) {
        if (jf == lead0 || jf == lead1) continue;
        std::array<Cx, 4> v{};
        v[jf] = 1.0;
        v[lead0] = -rows[0][jf];
        v[lead1] = -rows[1][jf];
        basis.push_back(v);
      }
      return basis;
    };

    const auto yb = kernel_pairs(bf);
    const auto zb = kernel_pairs(ad);
    REQUIRE(yb.size() == 2);
    REQUIRE(zb.size() == 2);
    for (const auto& y : yb) {
      for (const auto& z : zb) {
        const Cx at_pi = y[2] * std::conj(z[3]) - y[3] * std::conj(z[2]);
        const Cx at_0 = y[0] * std::conj(z[1]) - y[1] * std::conj(z[0]);
        CHECK(std::abs(at_pi - at_0) < 1e-12);
      }
    }
  }
}

TEST_CASE("adjoint of the adjoint spans the original conditions") {
  Rng rng(17);
  BoundaryForm bf;
  do {
    bf.A = {rng.complex_in_disk(), rng.complex_in_disk(), rng.complex_in_disk(),
            rng.complex_in_disk()};
    bf.B = {rng.complex_in_disk(), rng.complex_in_disk(), rng.complex_in_disk(),
            rng.complex_in_disk()};
  } while (!bf.full_rank());
  const BoundaryForm dd = adjoint_boundary_form(adjoint_boundary_form(bf));
  // Same row space: each row of dd.[A|B] must be a combination of bf rows,
  // checked via 3x4 rank drops.
  auto rank_drop = [&](Cx r1, Cx r2, Cx r3, Cx r4) {
    // Stack (bf rows; extra row) and require every 3x3 minor to vanish.
    const Cx m[3][4] = {{bf.A.m11, bf.A.m12, bf.B.m11, bf.B.m12},
                        {bf.A.m21, bf.A.m22, bf.B.m21, bf.B.m22},
                        {r1, r2, r3, r4}};
    double worst = 0.0;
    for (int c0 = 0; c0 < 4; ++c0)
      for (int c1 = c0 + 1; c1 < 4; ++c1)
        for (int c2 = c1 + 1; c2 < 4; ++c2) {
          const Cx det = m[0][c0] * (m[1][c1] * m[2][c2] - m[1][c2] * m[2][c1]) -
                         m[0][c1] * (m[1][c0] * m[2][c2] - m[1][c2] * m[2][c0]) +
                         m[0][c2] * (m[1][c0] * m[2][c1] - m[1][c1] * m[2][c0]);
          worst = std::max(worst, std::abs(det));
        }
    return worst;
  };
  CHECK(rank_drop(dd.A.m11, dd.A.m12, dd.B.m11, dd.B.m12) < 1e-12);
  CHECK(rank_drop(dd.A.m21, dd.A.m22, dd.B.m21, dd.B.m22) < 1e-12);
}

TEST_CASE("adjoint spectrum is the conjugate spectrum") {
  for (const BoundaryForm& bf : {dirichlet_form(), quasiperiodic_form(0.8)}) {
    const BoundaryForm ad = adjoint_boundary_form(bf);
    const auto sp = unperturbed_spectrum(bf, Cx(1.0, 0.0));
    const auto spa = unperturbed_spectrum(ad, Cx(1.0, 0.0));
    std::vector<Cx> adj;
    for (long n = -6; n <= 6; ++n) adj.push_back(spa.lambda0(n));
    for (long n = -4; n <= 4; ++n)
      CHECK(set_dist(std::conj(sp.lambda0(n)), adj) < 1e-12);
  }
}

TEST_CASE("unperturbed eigenfunctions satisfy conditions and normalization") {
  auto grid = Grid::make(128);
  const auto ue = unperturbed_eigenfunction(dirichlet_form(), Cx(3.0, 0.0), grid);
  CHECK(ue.geometric_multiplicity == 1);
  // Dirichlet at lambda = 3: y = s-type = (sin 3x, cos 3x)/sqrt(pi).
  const double s = 1.0 / std::sqrt(PI);
  double emax = 0.0;
  for (int i = 0; i < grid->n_nodes(); i += 37) {
    const double x = grid->node(i);
    emax = std::max(emax, std::abs(ue.y.a[i] - s * std::sin(3.0 * x)));
    emax = std::max(emax, std::abs(ue.y.b[i] - s * std::cos(3.0 * x)));
  }
  CHECK(emax < 1e-12);
  CHECK(std::abs(lp_norm(ue.y, 2.0) - 1.0) < 1e-12);
}

TEST_CASE("periodic double eigenvalues carry an orthonormal pair") {
  auto grid = Grid::make(128);
  const auto ue = unperturbed_eigenfunction(periodic_form(), Cx(4.0, 0.0), grid);
  CHECK(ue.geometric_multiplicity == 2);
  REQUIRE(ue.y2.has_value());
  CHECK(std::abs(lp_norm(ue.y, 2.0) - 1.0) < 1e-12);
  CHECK(std::abs(lp_norm(*ue.y2, 2.0) - 1.0) < 1e-12);
  CHECK(std::abs(inner_product(ue.y, *ue.y2)) < 1e-12);
}

TEST_CASE("resolvent application inverts the operator off the spectrum") {
  auto grid = Grid::make(512);
  const int n = grid->n_nodes();
  GridFn2 f(grid);
  for (int i = 0; i < n; ++i) {
    f.a[i] = 0.0;
    f.b[i] = 1.0;
  }
  // Constant data (0, 1): for dirichlet conditions the solution is exactly
  // (0, -1/lambda) at every off-spectrum lambda, including large imaginary
  // parts where the two-sided construction takes over.
  for (Cx lam : {Cx(10.5, 0.0), Cx(0.35, 2.0), Cx(0.35, 4.0), Cx(0.35, -9.0),
                 Cx(0.35, 30.0)}) {
    const auto y = green0_apply(dirichlet_form(), lam, f);
    double emax = 0.0;
    for (int i = 0; i < n; i += 51) {
      emax = std::max(emax, std::abs(y.a[i]));
      emax = std::max(emax, std::abs(y.b[i] + 1.0 / lam));
    }
    CHECK(emax < 2e-8);
  }
}

TEST_CASE("resolvent application matches a closed form with oscillatory data") {
  auto grid = Grid::make(512);
  const int n = grid->n_nodes();
  GridFn2 f(grid);
  for (int i = 0; i < n; ++i) {
    f.a[i] = 0.0;
    f.b[i] = std::sin(grid->node(i));
  }
  // Particular solution (cos x, -lambda sin x)/(lambda^2 - 1) plus the
  // dirichlet-fitted homogeneous correction.
  for (Cx lam : {Cx(7.4, 0.3), Cx(0.2, 3.4)}) {
    const auto y = green0_apply(dirichlet_form(), lam, f);
    const Cx den = lam * lam - 1.0;
    const Cx a = -1.0 / den;  // cancel y_p1(0) = 1/den
    const Cx b = -(std::cos(lam * PI) * a - 1.0 / den) / std::sin(lam * PI);
    double emax = 0.0;
    for (int i = 0; i < n; i += 73) {
      const double x = grid->node(i);
      const Cx y1 = std::cos(x) / den + a * std::cos(lam * x) + b * std::sin(lam * x);
      const Cx y2 = -lam * std::sin(x) / den - a * std::sin(lam * x) + b * std::cos(lam * x);
      emax = std::max(emax, std::abs(y.a[i] - y1));
      emax = std::max(emax, std::abs(y.b[i] - y2));
    }
    CHECK(emax < 1e-7);
  }
}

TEST_CASE("resolvent refuses eigenvalues") {
  auto grid = Grid::make(64);
  GridFn2 f(grid);
  for (int i = 0; i < grid->n_nodes(); ++i) f.b[i] = 1.0;
  CHECK_THROWS_AS(green0_apply(dirichlet_form(), Cx(4.0, 0.0), f), NumericError);
}

TEST_CASE("resolvent norm scan decays along the imaginary direction") {
  auto grid = Grid::make(1024);
  const double taus[] = {4.0, 8.0, 16.0, 32.0};
  const auto pts = resolvent0_norm_scan(dirichlet_form(), 0.35, taus, 2.0, 2.0,
                                        6, 1, grid);
  REQUIRE(pts.size() == 4);
  for (size_t i = 1; i < pts.size(); ++i)
    CHECK(pts[i].norm_estimate < pts[i - 1].norm_estimate);
  // Selfadjoint case: norm ~ 1/dist(lambda, Z) = 1/tau.
  CHECK(pts.back().norm_estimate * 32.0 > 0.3);
  CHECK(pts.back().norm_estimate * 32.0 < 3.0);
}
