#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "diracspec/expr.hpp"
#include "diracspec/grid.hpp"
#include "diracspec/oscillatory.hpp"
#include "diracspec/rng.hpp"
#include "diracspec/types.hpp"

using namespace dirac;

TEST_CASE("expm reproduces the planar rotation flow") {
  // exp(t * [[0,1],[-1,0]]) = [[cos t, sin t], [-sin t, cos t]].
  const double t = 0.7;
  const Mat2 m = expm(t * structure_matrix());
  CHECK(std::abs(m.m11 - std::cos(t)) < 1e-14);
  CHECK(std::abs(m.m12 - std::sin(t)) < 1e-14);
  CHECK(std::abs(m.m21 + std::sin(t)) < 1e-14);
  CHECK(std::abs(m.m22 - std::cos(t)) < 1e-14);
}

TEST_CASE("expm matches squared half-step on a complex matrix") {
  const Mat2 m{Cx(0.3, 0.1), Cx(-0.2, 0.4), Cx(0.7, -0.3), Cx(-0.1, 0.2)};
  const Mat2 whole = expm(m);
  const Mat2 half = expm(0.5 * m);
  const Mat2 sq = half * half;
  CHECK(std::abs(whole.m11 - sq.m11) < 1e-13);
  CHECK(std::abs(whole.m12 - sq.m12) < 1e-13);
  CHECK(std::abs(whole.m21 - sq.m21) < 1e-13);
  CHECK(std::abs(whole.m22 - sq.m22) < 1e-13);
}

TEST_CASE("expm handles defective and near-defective matrices") {
  // Nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
  const Mat2 n{0.0, 1.0, 0.0, 0.0};
  const Mat2 en = expm(n);
  CHECK(std::abs(en.m11 - 1.0) < 1e-15);
  CHECK(std::abs(en.m12 - 1.0) < 1e-15);
  CHECK(std::abs(en.m21) < 1e-15);
  CHECK(std::abs(en.m22 - 1.0) < 1e-15);
  // Nearly equal eigenvalues must not lose digits to 0/0.
  const Mat2 d{1.0, 1.0, Cx(0.0, 0.0), 1.0 + 1e-13};
  const Mat2 ed = expm(d);
  CHECK(std::abs(ed.m11 - std::exp(1.0)) < 1e-12);
  CHECK(std::abs(ed.m12 - std::exp(1.0)) < 1e-9);
}

TEST_CASE("Mat2 inverse and determinant") {
  const Mat2 m{Cx(1.0, 2.0), Cx(0.5, -1.0), Cx(-0.3, 0.0), Cx(2.0, 1.0)};
  const Mat2 mi = m.inverse();
  const Mat2 id = m * mi;
  CHECK(std::abs(id.m11 - 1.0) < 1e-14);
  CHECK(std::abs(id.m12) < 1e-14);
  CHECK(std::abs(id.m21) < 1e-14);
  CHECK(std::abs(id.m22 - 1.0) < 1e-14);
  CHECK(std::abs(m.det() * mi.det() - 1.0) < 1e-14);
}

TEST_CASE("grid integrates polynomials up to the interpolant degree exactly") {
  auto g = Grid::make(7);
  const int n = g->n_nodes();
  for (int deg = 0; deg <= 5; ++deg) {
    std::vector<Cx> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::pow(g->node(i), deg);
    const Cx got = g->integrate(v);
    const double want = std::pow(PI, deg + 1) / (deg + 1);
    CHECK(std::abs(got - want) < 1e-12 * want);
  }
}

TEST_CASE("grid prefix integral ends at the full integral") {
  auto g = Grid::make(33);
  const int n = g->n_nodes();
  std::vector<Cx> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = Cx(std::sin(3.0 * g->node(i)), std::cos(g->node(i)));
  const auto pre = g->integrate_prefix(v);
  REQUIRE(int(pre.size()) == n);
  CHECK(std::abs(pre.front()) < 1e-15);
  CHECK(std::abs(pre.back() - g->integrate(v)) < 1e-13);
  // Against the closed form int_0^x sin 3t dt = (1 - cos 3x)/3.
  for (int i = 0; i < n; i += 17) {
    const double x = g->node(i);
    const Cx want((1.0 - std::cos(3.0 * x)) / 3.0, std::sin(x));
    CHECK(std::abs(pre[i] - want) < 1e-10);
  }
}

TEST_CASE("grid derivative and eval recover smooth data") {
  auto g = Grid::make(64);
  const int n = g->n_nodes();
  std::vector<Cx> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(2.0 * g->node(i));
  const auto d = g->derivative(v);
  double emax = 0.0;
  for (int i = 0; i < n; ++i)
    emax = std::max(emax, std::abs(d[i] - 2.0 * std::cos(2.0 * g->node(i))));
  CHECK(emax < 1e-8);
  CHECK(std::abs(g->eval(v, 0.3) - std::sin(0.6)) < 1e-11);
  CHECK(std::abs(g->eval(v, PI) - std::sin(2.0 * PI)) < 1e-11);
}

TEST_CASE("grid inserts breakpoints as cell edges") {
  const double bp[] = {1.0, 2.5};
  auto g = Grid::make(16, bp);
  int found = 0;
  for (double e : g->edges())
    if (std::abs(e - 1.0) < 1e-15 || std::abs(e - 2.5) < 1e-15) ++found;
  CHECK(found == 2);
  CHECK(g->locate(1.0 - 1e-9) != g->locate(1.0 + 1e-9));
}

TEST_CASE("lp norms and inner product on known functions") {
  auto g = Grid::make(256);
  const int n = g->n_nodes();
  GridFn2 f(g), h(g);
  for (int i = 0; i < n; ++i) {
    const double x = g->node(i);
    f.a[i] = std::sin(x);
    f.b[i] = std::cos(x);
    h.a[i] = Cx(0.0, 1.0) * std::sin(2.0 * x);
    h.b[i] = 0.0;
  }
  // ||f||_2^2 = int sin^2 + cos^2 = pi.
  CHECK(std::abs(lp_norm(f, 2.0) - std::sqrt(PI)) < 1e-12);
  // <f, h> = conj(i) int sin x sin 2x dx = -i * 0 = 0.
  CHECK(std::abs(inner_product(f, h)) < 1e-12);
  // ||sin||_1 = 2 over [0, pi].
  GridFn1 s1(g);
  for (int i = 0; i < n; ++i) s1.v[i] = std::sin(g->node(i));
  CHECK(std::abs(lp_norm(s1, 1.0) - 2.0) < 1e-12);
  // sup norm via large p.
  CHECK(std::abs(lp_norm(s1, 1e300) - 1.0) < 1e-10);
}

TEST_CASE("fd_weights reproduce classic stencils") {
  // Central 3-point first derivative on unit spacing: [-1/2, 0, 1/2].
  const double xs[] = {-1.0, 0.0, 1.0};
  const auto w = fd_weights(0.0, xs, 1);
  REQUIRE(w.size() == 3);
  CHECK(std::abs(w[0] + 0.5) < 1e-14);
  CHECK(std::abs(w[1]) < 1e-14);
  CHECK(std::abs(w[2] - 0.5) < 1e-14);
  // Second derivative: [1, -2, 1].
  const auto w2 = fd_weights(0.0, xs, 2);
  CHECK(std::abs(w2[0] - 1.0) < 1e-13);
  CHECK(std::abs(w2[1] + 2.0) < 1e-13);
  CHECK(std::abs(w2[2] - 1.0) < 1e-13);
}

TEST_CASE("expression parser evaluates with correct precedence") {
  auto f = parse_expr("0.2*cos(x) + sin(2*x)^2 - 1/(x + 1)");
  const double x = 0.8;
  const Cx want = 0.2 * std::cos(x) + std::pow(std::sin(2 * x), 2) - 1.0 / (x + 1.0);
  CHECK(std::abs(f(x) - want) < 1e-15);
  auto g = parse_expr("i*exp(-x) + pi");
  CHECK(std::abs(g(0.5) - (Cx(0, 1) * std::exp(-0.5) + PI)) < 1e-15);
  auto h = parse_expr("-x^2");  // unary minus binds below the power
  CHECK(std::abs(h(2.0) - Cx(-4.0)) < 1e-15);
}

TEST_CASE("expression parser rejects malformed input") {
  CHECK_THROWS_AS(parse_expr("0.2*"), ConfigError);
  CHECK_THROWS_AS(parse_expr("cos(x"), ConfigError);
  CHECK_THROWS_AS(parse_expr("blah(x)"), ConfigError);
  CHECK_THROWS_AS(parse_expr(""), ConfigError);
}

TEST_CASE("oscillatory prefix matches closed forms at small and large omega") {
  auto g = Grid::make(128);
  const int n = g->n_nodes();
  std::vector<Cx> one(n, Cx(1.0, 0.0));
  for (Cx w : {Cx(3.0, 0.0), Cx(61.7, 0.0), Cx(15.0, 0.8), Cx(0.0, 0.0)}) {
    const auto pre = osc_prefix(*g, one, w);
    for (int i = 0; i < n; i += 41) {
      const double x = g->node(i);
      const Cx want = std::abs(w) < 1e-14
                          ? Cx(x, 0.0)
                          : (std::exp(Cx(0, 1) * w * x) - 1.0) / (Cx(0, 1) * w);
      CHECK(std::abs(pre[i] - want) < 2e-12 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("oscillatory prefix with a smooth factor beats naive accuracy") {
  auto g = Grid::make(96);
  const int n = g->n_nodes();
  std::vector<Cx> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(Cx(0, -1.0) * g->node(i));
  // int_0^x e^{-it} e^{i w t} dt with w = 40: closed form with omega' = 39.
  const Cx w(40.0, 0.0);
  const auto pre = osc_prefix(*g, f, w);
  const double x = g->node(n - 1);
  const Cx wp = w - 1.0;
  const Cx want = (std::exp(Cx(0, 1) * wp * x) - 1.0) / (Cx(0, 1) * wp);
  CHECK(std::abs(pre.back() - want) < 1e-11);
}

TEST_CASE("sincos prefix is consistent with the exponential prefix") {
  auto g = Grid::make(64);
  const int n = g->n_nodes();
  std::vector<Cx> f(n);
  for (int i = 0; i < n; ++i) f[i] = Cx(std::cos(g->node(i)), 0.3);
  const Cx w(7.3, 0.2);
  const auto sc = osc_prefix_sincos(*g, f, w);
  const auto ep = osc_prefix(*g, f, w);
  const auto em = osc_prefix(*g, f, -w);
  for (int i = 0; i < n; i += 23) {
    const Cx s_want = (ep[i] - em[i]) / Cx(0, 2);
    const Cx c_want = (ep[i] + em[i]) / 2.0;
    CHECK(std::abs(sc.sin_part[i] - s_want) < 1e-12);
    CHECK(std::abs(sc.cos_part[i] - c_want) < 1e-12);
  }
}

TEST_CASE("oscillatory prefix of the doubled lattice freezes the flat value") {
  // int_0^pi e^{-2it} e^{2it} dt = pi: the resonant pairing used by the
  // exponential-system diagnostics.
  auto g = Grid::make(128);
  const int n = g->n_nodes();
  std::vector<Cx> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(Cx(0, -2.0) * g->node(i));
  const auto pre = osc_prefix(*g, f, Cx(2.0, 0.0));
  CHECK(std::abs(pre.back() - Cx(PI, 0.0)) < 1e-12);
  // Off-resonant pairing vanishes: int_0^pi e^{-2it} e^{4it} dt = 0.
  const auto pre2 = osc_prefix(*g, f, Cx(4.0, 0.0));
  CHECK(std::abs(pre2.back()) < 1e-12);
}

TEST_CASE("rng is deterministic and in-disk") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const Cx za = a.complex_in_disk(), zb = b.complex_in_disk();
    CHECK(za == zb);
    CHECK(std::abs(za) <= 1.0);
  }
  Rng c(43);
  CHECK(a.complex_in_disk() != c.complex_in_disk());
  Rng u(7);
  for (int i = 0; i < 50; ++i) {
    const double x = u.uniform(0.3, 0.9);
    CHECK(x >= 0.3);
    CHECK(x <= 0.9);
  }
}
