#pragma once

#include "morph/core.hpp"

#include <string>
#include <vector>

namespace morph::mor {

struct Parameter {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> grid;  // strictly increasing, grid.front() == lower, grid.back() == upper

  int grid_size() const { return static_cast<int>(grid.size()); }
  double range() const { return upper - lower; }
};

/// Position of a value inside a 1D piecewise-linear grid.
struct GridLocation {
  int segment = 0;        // left node of the containing segment
  double weight = 0.0;    // weight of the right node; left node gets 1 - weight
  double slope = 0.0;     // d weight / d value on that segment
  double clamped = 0.0;   // value after clamping to [lower, upper]
  bool was_clamped = false;
};

/// Box of admissible parameter values with a 1D grid per parameter.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<Parameter> params);

  /// Uniform grid of `grid_size` nodes on [lower, upper].
  static Parameter uniform(const std::string& name, double lower, double upper, int grid_size);
  static Parameter from_grid(const std::string& name, std::vector<double> grid);

  int size() const { return static_cast<int>(params_.size()); }
  const Parameter& operator[](int k) const { return params_[k]; }
  const std::vector<Parameter>& params() const { return params_; }

  bool contains(const VecX& mu, double tol = 1e-12) const;
  /// Clamps mu into the box; returns true when any component moved.
  bool clamp(VecX& mu) const;

  /// Locates mu_k in parameter k's grid after clamping. Knots belong to the
  /// segment on their right, except the upper bound which belongs to the
  /// last segment.
  GridLocation locate(int k, double value) const;

  /// Every grid node combination (last parameter varies fastest).
  std::vector<VecX> full_grid() const;
  int full_grid_count() const;

 private:
  std::vector<Parameter> params_;
};

}  // namespace morph::mor
