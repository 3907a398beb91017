#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dirac {

using Cx = std::complex<double>;

inline constexpr double PI = std::numbers::pi_v<double>;

// Configuration / usage problems: CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures (non-convergence, inconsistent winding, ...): exit code 1.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request outside the validity region of an asymptotic method: exit code 1.
struct DomainError : NumericError {
  using NumericError::NumericError;
};

// Column 2-vector over C.
struct Vec2 {
  Cx a{0.0, 0.0};
  Cx b{0.0, 0.0};

  Vec2 operator+(const Vec2& o) const { return {a + o.a, b + o.b}; }
  Vec2 operator-(const Vec2& o) const { return {a - o.a, b - o.b}; }
  Vec2 operator*(Cx s) const { return {a * s, b * s}; }
};
inline Vec2 operator*(Cx s, const Vec2& v) { return v * s; }

// 2x2 matrix over C, row-major.
struct Mat2 {
  Cx m11{0.0, 0.0}, m12{0.0, 0.0};
  Cx m21{0.0, 0.0}, m22{0.0, 0.0};

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Mat2 operator+(const Mat2& o) const {
    return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22};
  }
  Mat2 operator*(Cx s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
  Mat2 operator*(const Mat2& o) const {
    return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
            m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
  }
  Vec2 operator*(const Vec2& v) const {
    return {m11 * v.a + m12 * v.b, m21 * v.a + m22 * v.b};
  }

  Cx det() const { return m11 * m22 - m12 * m21; }
  Cx trace() const { return m11 + m22; }
  Mat2 inverse() const {
    const Cx d = det();
    return {m22 / d, -m12 / d, -m21 / d, m11 / d};
  }
};
inline Mat2 operator*(Cx s, const Mat2& m) { return m * s; }

// exp(M) for 2x2 complex M in closed form. With mu = tr(M)/2 and N = M - mu*I
// (traceless), theta^2 = N11^2 + N12*N21 and
//   exp(M) = e^mu (cosh(theta) I + sinhc(theta) N).
// Both cosh and sinhc are even, so the sqrt branch does not matter.
inline Mat2 expm(const Mat2& m) {
  const Cx mu = 0.5 * m.trace();
  const Cx n11 = m.m11 - mu;
  const Cx th2 = n11 * n11 + m.m12 * m.m21;
  Cx ch, shc;
  if (std::abs(th2) < 1e-6) {
    // Series in theta^2; error below 1e-21 for |theta^2| < 1e-6.
    ch = 1.0 + th2 * (0.5 + th2 * (1.0 / 24.0 + th2 / 720.0));
    shc = 1.0 + th2 * (1.0 / 6.0 + th2 * (1.0 / 120.0 + th2 / 5040.0));
  } else {
    const Cx th = std::sqrt(th2);
    ch = std::cosh(th);
    shc = std::sinh(th) / th;
  }
  const Cx e = std::exp(mu);
  return {e * (ch + shc * n11), e * (shc * m.m12),
          e * (shc * m.m21), e * (ch - shc * n11)};
}

// The structure matrix B = [[0,1],[-1,0]] of the operator -B y' + Q y.
inline Mat2 structure_matrix() { return {0.0, 1.0, -1.0, 0.0}; }

inline std::string version_string() { return "diracspec 0.1.0"; }

}  // namespace dirac
