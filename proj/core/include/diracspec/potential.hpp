#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diracspec/grid.hpp"
#include "diracspec/types.hpp"

namespace dirac {

// One matrix entry of the potential: zero, a callable (parsed expression or
// programmatic closure), or samples with linear interpolation.
class ScalarCoef {
 public:
  ScalarCoef() = default;  // zero

  static ScalarCoef zero() { return ScalarCoef(); }
  static ScalarCoef expression(const std::string& src);
  static ScalarCoef function(std::function<Cx(double)> f);
  static ScalarCoef samples(std::vector<double> x, std::vector<Cx> v);

  Cx operator()(double x) const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  // Source text when expression-backed (for config echo).
  const std::string& source() const { return source_; }

 private:
  enum class Kind { Zero, Fn, Samples };
  Kind kind_ = Kind::Zero;
  std::function<Cx(double)> fn_;
  std::vector<double> sx_;
  std::vector<Cx> sv_;
  std::string source_;
};

// 2x2 matrix potential Q = [[q1, q2], [q3, q4]] with its Lebesgue index p
// (integrability class L^p, 1 < p <= 2) and optional declared structure.
struct Potential {
  ScalarCoef q1, q2, q3, q4;
  double p = 2.0;
  // Coefficient-size bound R used in validity-region constants; if unset it
  // is computed as max(||q1||_p, ||(q2+q3)/2||_p).
  std::optional<double> R_bound;
  // Interior points where coefficients jump or are otherwise non-smooth;
  // grids and adaptive quadrature subdivide here.
  std::vector<double> breakpoints;
  // Endpoints in {0, pi} where a coefficient is singular (integrable);
  // adaptive quadrature grades toward them.
  std::vector<double> singular_points;

  bool is_zero() const {
    return q1.is_zero() && q2.is_zero() && q3.is_zero() && q4.is_zero();
  }
  // Potential of the adjoint operator: entries conj-transposed.
  Potential adjoint() const;
  double conjugate_index() const {
    return p >= 1e12 ? 1.0 : p / (p - 1.0);
  }
  double effective_R() const;
};

// Potential sampled on a grid, with derived per-node data reused across many
// solves at different lambda.
struct SampledPotential {
  GridPtr grid;
  std::vector<Cx> q1, q2, q3, q4;
  std::vector<Cx> sum23;   // q2 + q3
  std::vector<Cx> diff23;  // q2 - q3
  std::vector<Cx> halfc;   // (q1 - q4)/2: oscillatory polar coefficient
  // -(1/2) int_0^x (q1 + q4): secular drift of the polar angle. Zero for
  // potentials already normalized to q4 = -q1.
  std::vector<Cx> drift;
  // W(x) = exp((1/2) int_0^x (q2 - q3)): the solution weight. Wronskian of
  // the fundamental pair equals W^2.
  std::vector<Cx> weight;
};

SampledPotential sample(const Potential& Q, const GridPtr& grid);

// L^p norm of a coefficient over [0, pi] by adaptive Gauss quadrature with
// geometric grading toward declared singular endpoints (p = inf: sup over a
// dense sample).
double coef_lp_norm(const ScalarCoef& f, double p,
                    std::span<const double> singular = {},
                    std::span<const double> breakpoints = {});

// Adaptive integral of a coefficient over [a, b].
Cx coef_integral(const ScalarCoef& f, double a, double b, double rel_tol = 1e-11,
                 std::span<const double> singular = {},
                 std::span<const double> breakpoints = {});

// W(pi) by adaptive quadrature of (q2 - q3)/2.
Cx weight_end(const Potential& Q);

// Rotation gauge with (possibly complex) angle phi: y = H(phi) w maps the
// problem for Q to the problem for the returned potential
//   H^{-1} Q H + phi' I,
// same lambda. phi_prime may be omitted (numerical differentiation).
Potential gauge_transform(const Potential& Q, std::function<Cx(double)> phi,
                          std::function<Cx(double)> phi_prime = nullptr);

struct NormalizedPotential {
  Potential Q;          // pointwise traceless
  Cx shift;             // spec(original) = spec(normalized) + shift
  std::function<Cx(double)> phi;  // gauge angle used, phi(0) = phi(pi) = 0
};

// Remove the trace by the rotation gauge with angle
// phi(x) = shift*x - (1/2) int_0^x tr Q, which vanishes at both endpoints,
// so the boundary form is unchanged; shift = (1/(2 pi)) int_0^pi tr Q.
NormalizedPotential normalize_trace(const Potential& Q);

}  // namespace dirac
