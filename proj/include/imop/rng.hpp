/**
 * @file rng.hpp
 * @brief Seeded random number generation with reproducible output.
 *
 * std::mt19937_64 has a fully specified output sequence, but the standard
 * distributions do not. All draws here are built directly on the raw engine
 * so that a given seed yields the same stream on every platform/compiler.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "imop/errors.hpp"

namespace imop {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one value per call; no caching so the
  /// draw count stays predictable).
  double normal01() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal01(); }

  /// Normal(mean, sd) truncated to [lo, hi] by rejection.
  double truncated_normal(double mean, double sd, double lo, double hi) {
    if (!(lo < hi) || !(sd > 0.0)) {
      throw InvalidParameter("truncated_normal: need lo < hi and sd > 0");
    }
    for (int i = 0; i < 100000; ++i) {
      const double v = normal(mean, sd);
      if (v >= lo && v <= hi) return v;
    }
    // Degenerate sd or mean far outside the window: fall back to the clamp.
    return std::min(hi, std::max(lo, mean));
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace imop
