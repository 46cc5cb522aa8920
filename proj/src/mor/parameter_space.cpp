#include "morph/mor/parameter_space.hpp"

#include <algorithm>

namespace morph::mor {

ParameterSpace::ParameterSpace(std::vector<Parameter> params) : params_(std::move(params)) {
  for (const auto& p : params_) {
    if (!(p.lower < p.upper)) throw ArgumentError("parameter '" + p.name + "': lower must be < upper");
    if (p.grid_size() < 2) throw ArgumentError("parameter '" + p.name + "': grid needs >= 2 nodes");
    for (int i = 1; i < p.grid_size(); ++i) {
      if (!(p.grid[i] > p.grid[i - 1])) {
        throw ArgumentError("parameter '" + p.name + "': grid must be strictly increasing");
      }
    }
    if (p.grid.front() != p.lower || p.grid.back() != p.upper) {
      throw ArgumentError("parameter '" + p.name + "': grid must span [lower, upper]");
    }
  }
}

Parameter ParameterSpace::uniform(const std::string& name, double lower, double upper, int grid_size) {
  if (grid_size < 2) throw ArgumentError("parameter '" + name + "': grid needs >= 2 nodes");
  Parameter p{name, lower, upper, {}};
  for (int i = 0; i < grid_size; ++i) {
    p.grid.push_back(i == grid_size - 1 ? upper : lower + (upper - lower) * i / (grid_size - 1));
  }
  return p;
}

Parameter ParameterSpace::from_grid(const std::string& name, std::vector<double> grid) {
  if (grid.size() < 2) throw ArgumentError("parameter '" + name + "': grid needs >= 2 nodes");
  Parameter p{name, grid.front(), grid.back(), std::move(grid)};
  return p;
}

bool ParameterSpace::contains(const VecX& mu, double tol) const {
  if (mu.size() != size()) return false;
  for (int k = 0; k < size(); ++k) {
    const double slack = tol * params_[k].range();
    if (mu[k] < params_[k].lower - slack || mu[k] > params_[k].upper + slack) return false;
  }
  return true;
}

bool ParameterSpace::clamp(VecX& mu) const {
  if (mu.size() != size()) throw ArgumentError("parameter vector has the wrong length");
  bool moved = false;
  for (int k = 0; k < size(); ++k) {
    const double c = std::clamp(mu[k], params_[k].lower, params_[k].upper);
    moved = moved || c != mu[k];
    mu[k] = c;
  }
  return moved;
}

GridLocation ParameterSpace::locate(int k, double value) const {
  const auto& g = params_[k].grid;
  GridLocation loc;
  loc.clamped = std::clamp(value, g.front(), g.back());
  loc.was_clamped = loc.clamped != value;
  // First node strictly greater than the value; its predecessor starts the segment.
  auto it = std::upper_bound(g.begin(), g.end(), loc.clamped);
  int seg = static_cast<int>(it - g.begin()) - 1;
  seg = std::clamp(seg, 0, static_cast<int>(g.size()) - 2);
  const double h = g[seg + 1] - g[seg];
  loc.segment = seg;
  loc.weight = (loc.clamped - g[seg]) / h;
  loc.slope = 1.0 / h;
  return loc;
}

int ParameterSpace::full_grid_count() const {
  int n = 1;
  for (const auto& p : params_) n *= p.grid_size();
  return size() == 0 ? 0 : n;
}

std::vector<VecX> ParameterSpace::full_grid() const {
  std::vector<VecX> out;
  const int total = full_grid_count();
  for (int flat = 0; flat < total; ++flat) {
    VecX mu(size());
    int rem = flat;
    for (int k = size() - 1; k >= 0; --k) {
      const int n = params_[k].grid_size();
      mu[k] = params_[k].grid[rem % n];
      rem /= n;
    }
    out.push_back(mu);
  }
  return out;
}

}  // namespace morph::mor
