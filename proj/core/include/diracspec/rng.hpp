#pragma once

#include <cstdint>
#include <random>

#include "diracspec/types.hpp"

namespace dirac {

// Deterministic uniform generator: the raw mt19937_64 stream is mapped to
// doubles explicitly so byte-identical output does not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  Cx complex_in_disk() {
    // Rejection-free: radius sqrt(u) times a deterministic angle.
    const double r = std::sqrt(uniform());
    const double phi = uniform(0.0, 2.0 * PI);
    return Cx(r * std::cos(phi), r * std::sin(phi));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dirac
