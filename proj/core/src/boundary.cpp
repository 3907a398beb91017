#include "diracspec/boundary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "diracspec/oscillatory.hpp"
#include "diracspec/rng.hpp"

namespace dirac {
namespace {

Cx column(const BoundaryForm& bf, int col, int row) {
  // Columns 1..4 of [A | B], rows 1..2.
  switch (col) {
    case 1: return row == 1 ? bf.A.m11 : bf.A.m21;
    case 2: return row == 1 ? bf.A.m12 : bf.A.m22;
    case 3: return row == 1 ? bf.B.m11 : bf.B.m21;
    default: return row == 1 ? bf.B.m12 : bf.B.m22;
  }
}

// Relative magnitude floor for deciding that a witness vanishes.
double form_scale(const BoundaryForm& bf) {
  double s = 0.0;
  for (int a = 1; a <= 4; ++a)
    for (int r = 1; r <= 2; ++r) s = std::max(s, std::abs(column(bf, a, r)));
  return s * s;  // minors are quadratic in the entries
}

Cx normalize_even(Cx kappa) {
  while (kappa.real() > 1.0 + 1e-12) kappa -= 2.0;
  while (kappa.real() <= -1.0 + 1e-12) kappa += 2.0;
  return kappa;
}

}  // namespace

Cx BoundaryForm::minor(int a, int b) const {
  return column(*this, a, 1) * column(*this, b, 2) -
         column(*this, b, 1) * column(*this, a, 2);
}

bool BoundaryForm::full_rank() const {
  double m = 0.0;
  for (int a = 1; a <= 4; ++a)
    for (int b = a + 1; b <= 4; ++b) m = std::max(m, std::abs(minor(a, b)));
  return m > 1e-14 * std::max(1.0, form_scale(*this));
}

BoundaryForm dirichlet_form() {
  return {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
}

BoundaryForm dirichlet_neumann_form() {
  return {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}};
}

BoundaryForm periodic_form() {
  return {{1.0, 0.0, 0.0, 1.0}, {-1.0, 0.0, 0.0, -1.0}};
}

BoundaryForm antiperiodic_form() {
  return {{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
}

BoundaryForm quasiperiodic_form(double alpha) {
  const Cx e = std::exp(Cx(0.0, alpha));
  return {{1.0, 0.0, 0.0, 1.0}, {-e, 0.0, 0.0, -e}};
}

BoundaryForm associated_form(const BoundaryForm& bf, Cx W_end) {
  BoundaryForm out = bf;
  out.B = bf.B * W_end;
  return out;
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::StronglyRegular: return "strongly_regular";
    case BoundaryClass::RegularNotStrong: return "regular_not_strong";
    case BoundaryClass::NondegenerateOnly: return "nondegenerate_only";
    case BoundaryClass::Degenerate: return "degenerate";
  }
  return "?";
}

Classification classify(const BoundaryForm& bf, Cx W_end) {
  if (!bf.full_rank())
    throw ConfigError("boundary form [A | B] must have rank 2");
  Classification c;
  c.W_end = W_end;
  const Cx J12 = bf.minor(1, 2), J13 = bf.minor(1, 3), J14 = bf.minor(1, 4);
  const Cx J23 = bf.minor(2, 3), J24 = bf.minor(2, 4), J34 = bf.minor(3, 4);
  c.a = J14 - J23 - Cx(0.0, 1.0) * (J13 + J24);
  c.abar = J14 - J23 + Cx(0.0, 1.0) * (J13 + J24);
  c.b = J12 + W_end * W_end * J34;
  c.disc = c.b * c.b - W_end * W_end * c.a * c.abar;
  c.witnesses = {c.a, c.abar};

  const double scale = std::max(form_scale(bf), 1e-300) *
                       std::max(1.0, std::norm(W_end));
  const double tol = 1e-12 * scale;
  const bool a_zero = std::abs(c.a) <= tol;
  const bool abar_zero = std::abs(c.abar) <= tol;
  const bool b_zero = std::abs(c.b) <= tol;
  if (a_zero && abar_zero && b_zero) {
    c.kind = BoundaryClass::Degenerate;
  } else if (!a_zero && !abar_zero) {
    c.kind = std::abs(c.disc) <= tol * scale
                 ? BoundaryClass::RegularNotStrong
                 : BoundaryClass::StronglyRegular;
  } else {
    c.kind = BoundaryClass::NondegenerateOnly;
  }
  return c;
}

Mat2 M0_matrix(const BoundaryForm& bf, Cx lambda) {
  const Cx cp = std::cos(PI * lambda), sp = std::sin(PI * lambda);
  Mat2 m;
  m.m11 = bf.A.m11 + bf.B.m11 * cp - bf.B.m12 * sp;
  m.m12 = bf.A.m12 + bf.B.m11 * sp + bf.B.m12 * cp;
  m.m21 = bf.A.m21 + bf.B.m21 * cp - bf.B.m22 * sp;
  m.m22 = bf.A.m22 + bf.B.m21 * sp + bf.B.m22 * cp;
  return m;
}

Cx delta0(const BoundaryForm& bf, Cx W_end, Cx lambda) {
  const Classification c = classify(bf, W_end);
  const Cx e = std::exp(Cx(0.0, 1.0) * PI * lambda);
  return 0.5 * W_end * c.a * e + c.b + 0.5 * W_end * c.abar / e;
}

Cx UnperturbedSpectrum::lambda0(long n) const {
  switch (kind) {
    case SpectrumKind::TwoSeries:
      return ((n % 2 + 2) % 2 == 0 ? kappa0 : kappa1) + Cx(double(n), 0.0);
    case SpectrumKind::SingleSeries:
      return kappa0 + Cx(2.0 * double(n), 0.0);
    case SpectrumKind::Empty:
      throw NumericError("unperturbed spectrum is empty");
    case SpectrumKind::WholePlane:
      throw NumericError(
          "unperturbed determinant vanishes identically; every lambda is an "
          "eigenvalue");
  }
  return {};
}

int UnperturbedSpectrum::multiplicity(long n) const {
  if (kind == SpectrumKind::SingleSeries) return 1;
  if (kind != SpectrumKind::TwoSeries) return 0;
  // The two series meet where kappa0 - kappa1 is an odd integer.
  const Cx d = kappa0 - kappa1;
  const double r = d.real();
  const long ri = std::lround(r);
  if (std::abs(d.imag()) < 1e-9 && std::abs(r - double(ri)) < 1e-9 &&
      (ri % 2 + 2) % 2 == 1)
    return 2;
  return 1;
}

UnperturbedSpectrum unperturbed_spectrum(const BoundaryForm& bf, Cx W_end) {
  UnperturbedSpectrum out;
  out.cls = classify(bf, W_end);
  const Cx a = out.cls.a, b = out.cls.b, abar = out.cls.abar;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(abar)});
  const double tol = 1e-12 * std::max(scale, 1e-300);
  const bool a_zero = std::abs(a) <= tol;
  const bool abar_zero = std::abs(abar) <= tol;
  const bool b_zero = std::abs(b) <= tol;

  if (out.cls.kind == BoundaryClass::Degenerate) {
    out.kind = SpectrumKind::WholePlane;
    return out;
  }
  if (!a_zero && !abar_zero) {
    out.kind = SpectrumKind::TwoSeries;
    const Cx sq = std::sqrt(out.cls.disc);
    const Cx r0 = (-b + sq) / (W_end * a);
    const Cx r1 = (-b - sq) / (W_end * a);
    const Cx i_over_pi(0.0, 1.0 / PI);
    const Cx k0 = normalize_even(-i_over_pi * std::log(r0));
    const Cx k1 = normalize_even(-i_over_pi * std::log(r1));
    const bool swap = (k1.real() < k0.real() - 1e-14) ||
                      (std::abs(k1.real() - k0.real()) <= 1e-14 &&
                       k1.imag() < k0.imag());
    out.z0 = swap ? r1 : r0;
    out.z1 = swap ? r0 : r1;
    out.kappa0 = swap ? k1 : k0;
    out.kappa1 =
        normalize_even(1.0 - i_over_pi * std::log(out.z1));
    return out;
  }
  // One of the leading/trailing coefficients vanishes.
  if ((a_zero && abar_zero && !b_zero) || (a_zero && b_zero) ||
      (abar_zero && b_zero)) {
    out.kind = SpectrumKind::Empty;
    return out;
  }
  out.kind = SpectrumKind::SingleSeries;
  const Cx z = a_zero ? -W_end * abar / (2.0 * b) : -2.0 * b / (W_end * a);
  out.z0 = out.z1 = z;
  out.kappa0 = out.kappa1 =
      normalize_even(-Cx(0.0, 1.0 / PI) * std::log(z));
  return out;
}

UnperturbedEigen unperturbed_eigenfunction(const BoundaryForm& bf, Cx lambda,
                                           const GridPtr& grid) {
  UnperturbedEigen out;
  out.lambda = lambda;
  const Mat2 M = M0_matrix(bf, lambda);
  const double scale =
      std::max({std::abs(M.m11), std::abs(M.m12), std::abs(M.m21),
                std::abs(M.m22)});
  const double bscale = std::max(1.0, form_scale(bf)) *
                        std::exp(PI * std::abs(lambda.imag()));

  auto fill = [&](const Vec2& gamma, GridFn2& y) {
    for (int i = 0; i < grid->n_nodes(); ++i) {
      const double x = grid->node(i);
      const Cx c = std::cos(lambda * x), s = std::sin(lambda * x);
      y.a[i] = gamma.a * c + gamma.b * s;
      y.b[i] = -gamma.a * s + gamma.b * c;
    }
  };

  if (scale <= 1e-10 * bscale) {
    // M0 vanishes: two-dimensional eigenspace spanned by c0 and s0.
    out.geometric_multiplicity = 2;
    out.gamma = {1.0, 0.0};
    out.gamma2 = Vec2{0.0, 1.0};
    out.y = GridFn2(grid);
    fill(out.gamma, out.y);
    const double n1 = lp_norm(out.y, 2.0);
    for (auto& v : out.y.a) v /= n1;
    for (auto& v : out.y.b) v /= n1;
    out.gamma.a /= n1;
    GridFn2 y2(grid);
    fill(*out.gamma2, y2);
    const double n2 = lp_norm(y2, 2.0);
    for (auto& v : y2.a) v /= n2;
    for (auto& v : y2.b) v /= n2;
    out.gamma2->b /= n2;
    out.y2 = std::move(y2);
    return out;
  }

  // Null vector of the dominant row.
  const bool r1 = std::hypot(std::abs(M.m11), std::abs(M.m12)) >=
                  std::hypot(std::abs(M.m21), std::abs(M.m22));
  Vec2 gamma = r1 ? Vec2{-M.m12, M.m11} : Vec2{-M.m22, M.m21};
  const Cx other = r1 ? M.m21 * gamma.a + M.m22 * gamma.b
                      : M.m11 * gamma.a + M.m12 * gamma.b;
  if (std::abs(other) > 1e-6 * scale * std::hypot(std::abs(gamma.a), std::abs(gamma.b)))
    throw NumericError(
        "unperturbed_eigenfunction: lambda is not an eigenvalue (boundary "
        "matrix is nonsingular)");

  out.y = GridFn2(grid);
  fill(gamma, out.y);
  const double nn = lp_norm(out.y, 2.0);
  gamma.a /= nn;
  gamma.b /= nn;
  for (auto& v : out.y.a) v /= nn;
  for (auto& v : out.y.b) v /= nn;
  out.gamma = gamma;

  // Exact derivative of det M0 detects a double zero.
  const Cx cp = std::cos(PI * lambda), sp = std::sin(PI * lambda);
  Mat2 Mp;  // d/dlambda of M0
  Mp.m11 = PI * (-bf.B.m11 * sp - bf.B.m12 * cp);
  Mp.m12 = PI * (bf.B.m11 * cp - bf.B.m12 * sp);
  Mp.m21 = PI * (-bf.B.m21 * sp - bf.B.m22 * cp);
  Mp.m22 = PI * (bf.B.m21 * cp - bf.B.m22 * sp);
  const Cx ddet = Mp.m11 * M.m22 + M.m11 * Mp.m22 - Mp.m12 * M.m21 -
                  M.m12 * Mp.m21;
  if (std::abs(ddet) > 1e-8 * bscale * PI) return out;  // simple zero

  // Double zero with one-dimensional eigenspace: associated function
  // y1 = x (gamma.b c0 - gamma.a s0) + beta1 c0 + beta2 s0.
  const Cx cpi = std::cos(lambda * PI), spi = std::sin(lambda * PI);
  // pi * (gamma.b c0(pi) - gamma.a s0(pi)):
  const Vec2 tail = {PI * (gamma.b * cpi - gamma.a * spi),
                     PI * (-gamma.b * spi - gamma.a * cpi)};
  const Vec2 v = {bf.B.m11 * tail.a + bf.B.m12 * tail.b,
                  bf.B.m21 * tail.a + bf.B.m22 * tail.b};
  // Solve M beta = -v using the dominant row (rank 1).
  Cx ra, rb, rv;
  if (r1) {
    ra = M.m11;
    rb = M.m12;
    rv = v.a;
  } else {
    ra = M.m21;
    rb = M.m22;
    rv = v.b;
  }
  const double rn = std::norm(ra) + std::norm(rb);
  Cx beta1 = -rv * std::conj(ra) / rn;
  Cx beta2 = -rv * std::conj(rb) / rn;
  const Cx incons = r1 ? M.m21 * beta1 + M.m22 * beta2 + v.b
                       : M.m11 * beta1 + M.m12 * beta2 + v.a;
  if (std::abs(incons) > 1e-6 * (scale + std::abs(rv)))
    throw NumericError(
        "unperturbed_eigenfunction: boundary conditions admit no associated "
        "function at this double zero");

  GridFn2 y1(grid);
  for (int i = 0; i < grid->n_nodes(); ++i) {
    const double x = grid->node(i);
    const Cx c = std::cos(lambda * x), s = std::sin(lambda * x);
    y1.a[i] = x * (gamma.b * c - gamma.a * s) + beta1 * c + beta2 * s;
    y1.b[i] = x * (-gamma.b * s - gamma.a * c) - beta1 * s + beta2 * c;
  }
  // Orthogonalize against the eigenfunction.
  const Cx t = -std::conj(inner_product(out.y, y1));
  for (int i = 0; i < grid->n_nodes(); ++i) {
    y1.a[i] += t * out.y.a[i];
    y1.b[i] += t * out.y.b[i];
  }
  out.jordan = std::move(y1);
  out.beta1 = beta1 + t * gamma.a;
  out.beta2 = beta2 + t * gamma.b;
  return out;
}

namespace {

// Moments int_0^h s^k e^{mu s} ds, k = 0, 1, 2, stable for Re(mu h) <= 0.
void kernel_moments(Cx mu, double h, Cx& J0, Cx& J1, Cx& J2) {
  const Cx w = mu * h;
  if (std::abs(w) < 0.25) {
    // J_k = h^{k+1} sum_m w^m / ((m+k+1) m!)
    Cx s0 = 0, s1 = 0, s2 = 0, wp = 1.0;
    double fact = 1.0;
    for (int m = 0; m < 14; ++m) {
      if (m > 0) {
        wp *= w;
        fact *= m;
      }
      s0 += wp / ((m + 1) * fact);
      s1 += wp / ((m + 2) * fact);
      s2 += wp / ((m + 3) * fact);
    }
    J0 = h * s0;
    J1 = h * h * s1;
    J2 = h * h * h * s2;
    return;
  }
  const Cx E = std::exp(w);
  J0 = (E - 1.0) / mu;
  J1 = (h * E - J0) / mu;
  J2 = (h * h * E - 2.0 * J1) / mu;
}

// int_0^h e^{mu s} (c0 + c1 s + c2 s^2) ds.
Cx cell_integral(Cx mu, double h, Cx c0, Cx c1, Cx c2) {
  Cx J0, J1, J2;
  kernel_moments(mu, h, J0, J1, J2);
  return c0 * J0 + c1 * J1 + c2 * J2;
}

// Quadratic Newton-interpolant coefficients of phi on the cell [x_j, x_j+1],
// expanded in the local variable s = t - x_j. Uses nodes {j-1, j, j+1}
// (or {0, 1, 2} on the first cell).
void cell_quadratic(const Grid& grid, const std::vector<Cx>& phi, int j,
                    Cx& c0, Cx& c1, Cx& c2) {
  const int n = int(phi.size());
  int ia, ib, ic;
  if (n < 3) {
    ia = 0;
    ib = n - 1;
    ic = -1;
  } else if (j == 0) {
    ia = 0, ib = 1, ic = 2;
  } else {
    ia = j - 1, ib = j, ic = j + 1;
  }
  const double xa = grid.node(ia), xb = grid.node(ib);
  const Cx d0 = phi[ia];
  const Cx d1 = (phi[ib] - phi[ia]) / (xb - xa);
  if (ic < 0) {
    const double u = grid.node(j) - xa;
    c0 = d0 + d1 * u;
    c1 = d1;
    c2 = 0.0;
    return;
  }
  const double xc = grid.node(ic);
  const Cx d2 = ((phi[ic] - phi[ib]) / (xc - xb) - d1) / (xc - xa);
  const double u = grid.node(j) - xa, v = grid.node(j) - xb;
  c0 = d0 + d1 * u + d2 * u * v;
  c1 = d1 + d2 * (u + v);
  c2 = d2;
}

// Resolvent application in the exponential eigenbasis of B with both
// channels anchored at their decaying ends, so no intermediate quantity
// exceeds the size of the data. Needed once e^{2 pi |Im lambda|} eps is
// visible; the rotation-basis path is more accurate for small |Im lambda|.
GridFn2 green0_apply_twosided(const BoundaryForm& bf, Cx lambda,
                              const GridFn2& f) {
  const GridPtr grid = f.grid;
  const int n = grid->n_nodes();
  const double sg = lambda.imag() < 0.0 ? -1.0 : 1.0;
  const Cx ii(0.0, 1.0);
  const Cx mu = sg * ii * lambda;  // Re(mu) <= 0: e^{mu s} decays
  const Vec2 vf{1.0, sg * ii}, vb{1.0, -sg * ii};

  // B f = phi_f v_f + phi_b v_b.
  std::vector<Cx> phf(n), phb(n);
  for (int i = 0; i < n; ++i) {
    phf[i] = 0.5 * (f.b[i] + sg * ii * f.a[i]);
    phb[i] = 0.5 * (f.b[i] - sg * ii * f.a[i]);
  }

  // Af(x_j) = int_0^{x_j} e^{mu (x_j - t)} phi_f dt  (forward recurrence),
  // Bb(x_j) = int_{x_j}^{pi} e^{mu (t - x_j)} phi_b dt (backward recurrence).
  std::vector<Cx> Af(n, 0.0), Bb(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    const double h = grid->node(j + 1) - grid->node(j);
    Cx c0, c1, c2;
    cell_quadratic(*grid, phf, j, c0, c1, c2);
    // int_0^h e^{mu (h-s)} phi(s) ds via s -> h - s.
    const Cx a0 = c0 + c1 * h + c2 * h * h;
    const Cx a1 = -c1 - 2.0 * c2 * h;
    Af[j + 1] = std::exp(mu * h) * Af[j] + cell_integral(mu, h, a0, a1, c2);
  }
  for (int j = n - 2; j >= 0; --j) {
    const double h = grid->node(j + 1) - grid->node(j);
    Cx c0, c1, c2;
    cell_quadratic(*grid, phb, j, c0, c1, c2);
    Bb[j] = std::exp(mu * h) * Bb[j + 1] + cell_integral(mu, h, c0, c1, c2);
  }

  // y = v_f (e^{mu x} alpha + Af) + v_b (e^{mu (pi - x)} beta - Bb);
  // boundary system from U(y) = A y(0) + B y(pi) = 0 with z = e^{mu pi}.
  const Cx z = std::exp(mu * PI);
  auto apply = [](const Mat2& m, const Vec2& v) -> Vec2 {
    return {m.m11 * v.a + m.m12 * v.b, m.m21 * v.a + m.m22 * v.b};
  };
  const Vec2 Avf = apply(bf.A, vf), Avb = apply(bf.A, vb);
  const Vec2 Bvf = apply(bf.B, vf), Bvb = apply(bf.B, vb);
  const Mat2 M{Avf.a + z * Bvf.a, z * Avb.a + Bvb.a,
               Avf.b + z * Bvf.b, z * Avb.b + Bvb.b};
  const Vec2 rhs{Avb.a * Bb[0] - Bvf.a * Af[n - 1],
                 Avb.b * Bb[0] - Bvf.b * Af[n - 1]};
  const double r1 = std::hypot(std::abs(M.m11), std::abs(M.m12));
  const double r2 = std::hypot(std::abs(M.m21), std::abs(M.m22));
  if (std::abs(M.det()) <= 1e-12 * std::max(r1 * r2, 1e-300))
    throw NumericError(
        "green0_apply: lambda is an eigenvalue of the unperturbed problem");
  const Vec2 ab = M.inverse() * rhs;

  GridFn2 out(grid);
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    const Cx wf = std::exp(mu * x) * ab.a + Af[i];
    const Cx wb = std::exp(mu * (PI - x)) * ab.b - Bb[i];
    out.a[i] = vf.a * wf + vb.a * wb;
    out.b[i] = vf.b * wf + vb.b * wb;
  }
  return out;
}

}  // namespace

GridFn2 green0_apply(const BoundaryForm& bf, Cx lambda, const GridFn2& f) {
  if (std::abs(lambda.imag()) * PI >= 8.0)
    return green0_apply_twosided(bf, lambda, f);
  const GridPtr grid = f.grid;
  const int n = grid->n_nodes();
  // Variation of constants on the closed-form pair: y_p = Y0(x) I(x),
  // I(x) = int_0^x Y0(t)^{-1} B f(t) dt with Y0^{-1} = [[cos,-sin],[sin,cos]].
  const auto p1 = osc_prefix_sincos(*grid, f.a, lambda);
  const auto p2 = osc_prefix_sincos(*grid, f.b, lambda);
  GridFn2 out(grid);
  std::vector<Cx> I1(n), I2(n);
  for (int i = 0; i < n; ++i) {
    I1[i] = p2.cos_part[i] + p1.sin_part[i];
    I2[i] = p2.sin_part[i] - p1.cos_part[i];
  }
  const Cx cpi = std::cos(lambda * PI), spi = std::sin(lambda * PI);
  const Vec2 yp_end = {cpi * I1[n - 1] + spi * I2[n - 1],
                       -spi * I1[n - 1] + cpi * I2[n - 1]};
  const Vec2 U = {bf.B.m11 * yp_end.a + bf.B.m12 * yp_end.b,
                  bf.B.m21 * yp_end.a + bf.B.m22 * yp_end.b};
  const Mat2 M = M0_matrix(bf, lambda);
  const Cx det = M.det();
  // Hadamard-relative singularity test: |det| <= r1 r2 always, with equality
  // iff the rows are orthogonal, so the ratio is a scale-free rank gauge.
  const double r1 = std::hypot(std::abs(M.m11), std::abs(M.m12));
  const double r2 = std::hypot(std::abs(M.m21), std::abs(M.m22));
  if (std::abs(det) <= 1e-12 * std::max(r1 * r2, 1e-300))
    throw NumericError(
        "green0_apply: lambda is an eigenvalue of the unperturbed problem");
  const Vec2 gamma = M.inverse() * Vec2{-U.a, -U.b};
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    const Cx c = std::cos(lambda * x), s = std::sin(lambda * x);
    const Cx w1 = gamma.a + I1[i], w2 = gamma.b + I2[i];
    out.a[i] = c * w1 + s * w2;
    out.b[i] = -s * w1 + c * w2;
  }
  return out;
}

std::vector<ScanPoint> resolvent0_norm_scan(const BoundaryForm& bf,
                                            double re_anchor,
                                            std::span<const double> taus,
                                            double p, double q, int n_probes,
                                            std::uint64_t seed,
                                            const GridPtr& grid) {
  // Probes fixed across the scan: random trigonometric polynomials and
  // random ramps in both components.
  Rng rng(seed);
  std::vector<GridFn2> probes;
  probes.reserve(n_probes);
  const int n = grid->n_nodes();
  for (int k = 0; k < n_probes; ++k) {
    GridFn2 f(grid);
    if (k % 2 == 0) {
      const int deg = 6;
      std::vector<Cx> ca(deg + 1), cb(deg + 1), sa(deg + 1), sb(deg + 1);
      for (int m = 0; m <= deg; ++m) {
        ca[m] = rng.complex_in_disk();
        cb[m] = rng.complex_in_disk();
        sa[m] = rng.complex_in_disk();
        sb[m] = rng.complex_in_disk();
      }
      for (int i = 0; i < n; ++i) {
        const double x = grid->node(i);
        Cx va{}, vb{};
        for (int m = 0; m <= deg; ++m) {
          va += ca[m] * std::cos(m * x) + sa[m] * std::sin(m * x);
          vb += cb[m] * std::cos(m * x) + sb[m] * std::sin(m * x);
        }
        f.a[i] = va;
        f.b[i] = vb;
      }
    } else {
      // Deterministic log-spaced widths from 0.3 down to 0.005 with random
      // centers: the L1 -> Lq operator norms are attained on near-concentrated
      // sources of width ~ 1/|Im lambda|, so every scan needs sources narrower
      // than the shortest kernel scale it probes. Smooth bumps keep the
      // panel quadrature accurate at the narrow end.
      const int n_hats = (n_probes + 1) / 2;
      const int j = k / 2;
      const double frac = n_hats > 1 ? double(j) / double(n_hats - 1) : 0.0;
      const double w = 0.3 * std::exp(-frac * std::log(60.0));
      const double c = rng.uniform(0.3, PI - 0.3);
      const Cx amp_a = rng.complex_in_disk(), amp_b = rng.complex_in_disk();
      for (int i = 0; i < n; ++i) {
        const double x = grid->node(i);
        const double u = (x - c) / w;
        f.a[i] = amp_a * std::exp(-u * u);
        f.b[i] = amp_b * std::exp(-u * u);
      }
    }
    probes.push_back(std::move(f));
  }
  std::vector<ScanPoint> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    const Cx lambda(re_anchor, tau);
    double best = 0.0;
    for (const auto& f : probes) {
      const double fn = lp_norm(f, p);
      if (fn <= 0.0) continue;
      const GridFn2 y = green0_apply(bf, lambda, f);
      best = std::max(best, lp_norm(y, q) / fn);
    }
    out.push_back({tau, best});
  }
  return out;
}

BoundaryForm adjoint_boundary_form(const BoundaryForm& bf) {
  if (!bf.full_rank())
    throw ConfigError("boundary form [A | B] must have rank 2");
  // Boundary bracket [y, z] = (y1 conj(z2) - y2 conj(z1))(pi) - (...)(0)
  // = yhat^T Wb conj(zhat), Wb = blockdiag(-Ja, Ja), Ja = [[0,1],[-1,0]].
  Eigen::Matrix<Cx, 2, 4> U;
  U << bf.A.m11, bf.A.m12, bf.B.m11, bf.B.m12,
       bf.A.m21, bf.A.m22, bf.B.m21, bf.B.m22;
  const Eigen::Matrix<Cx, 4, Eigen::Dynamic> N =
      Eigen::FullPivLU<Eigen::Matrix<Cx, 2, 4>>(U).kernel();
  if (N.cols() != 2)
    throw ConfigError("boundary form kernel is not two-dimensional");
  Eigen::Matrix<Cx, 4, 4> Wb;
  Wb.setZero();
  Wb(0, 1) = -1.0;
  Wb(1, 0) = 1.0;
  Wb(2, 3) = 1.0;
  Wb(3, 2) = -1.0;
  // z admissible iff conj(N^T Wb) zhat = 0.
  Eigen::Matrix<Cx, 2, 4> K = (N.transpose() * Wb).conjugate();
  for (int r = 0; r < 2; ++r) {
    double m = 0.0;
    for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(K(r, c)));
    K.row(r) /= Cx(m, 0.0);
  }
  BoundaryForm out;
  out.A = {K(0, 0), K(0, 1), K(1, 0), K(1, 1)};
  out.B = {K(0, 2), K(0, 3), K(1, 2), K(1, 3)};
  return out;
}

}  // namespace dirac
