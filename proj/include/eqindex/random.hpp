#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace eqindex {

/// Park-Miller "minimal standard" generator x <- 48271 x mod (2^31 - 1),
/// exposed through fixed formulas so streams are reproducible in any
/// language: uniform() = (x - 1) / (2^31 - 2), normal() by Box-Muller on
/// two consecutive uniforms.
class Lcg {
 public:
  explicit Lcg(std::uint32_t seed) : engine_(seed == 0 ? 1u : seed) {}

  double uniform() { return double(engine_() - 1) / 2147483646.0; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // in (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::minstd_rand engine_;
};

}  // namespace eqindex
