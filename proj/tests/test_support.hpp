#pragma once

// Shared helpers for the unit and acceptance suites: seeded generators and
// tolerance comparisons. Oracles live next to the tests that use them.

#include "morph/core.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace morph::testing {

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec3(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return Vec3(uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  Eigen::Quaterniond q(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1),
                       uniform(rng, -1, 1));
  q.normalize();
  return q.toRotationMatrix();
}

/// max |a - b| / max(max |b|, floor)
template <typename A, typename B>
double rel_error(const A& a, const B& b, double floor = 1e-300) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), floor);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace morph::testing
