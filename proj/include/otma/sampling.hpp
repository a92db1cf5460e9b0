#pragma once

#include <cstdint>
#include <random>

#include "otma/fields.hpp"
#include "otma/types.hpp"

namespace otma {

/// Deterministic seeded sampler for verification sweeps. Avoids
/// std::uniform_real_distribution so that a fixed seed produces the same
/// point stream on every platform.
class PointSampler {
 public:
  explicit PointSampler(std::uint64_t seed) : rng_(seed) {}

  double uniform01() { return (rng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform in the box shrunk by `margin_fraction` of each side length.
  Vec3 in_box(const Box3& box, double margin_fraction = 0.0) {
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      const double margin = margin_fraction * (box.hi[i] - box.lo[i]);
      p[i] = uniform(box.lo[i] + margin, box.hi[i] - margin);
    }
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace otma
