#pragma once

#include "morph/core.hpp"
#include "morph/fem/mesh.hpp"

#include <vector>

namespace morph::mor {

class ApproximationToleranceError : public Error {
 public:
  ApproximationToleranceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Discretized moving load: values(i, j) is the nodal force magnitude at
/// boundary node nodes[i] when the load sits at parameter grid node j,
/// acting along `direction`.
struct LoadMatrix {
  std::vector<int> nodes;
  Vec3 direction = Vec3::UnitY();
  MatX values;
};

/// Load matrix of a force of magnitude `force` centred at each s-grid
/// position. width == 0 gives the nodal delta (positions must coincide
/// with s-grid nodes, 1e-12 tolerance); width > 0 a Gaussian profile of that
/// standard deviation.
LoadMatrix moving_point_load(const std::vector<int>& nodes, const std::vector<double>& positions,
                             const std::vector<double>& s_grid, double force, const Vec3& direction,
                             double width = 0.0);

/// t(X, s) ~= sum_j h_j(X) k_j(s).
struct SeparatedLoad {
  std::vector<int> nodes;
  Vec3 direction = Vec3::UnitY();
  MatX h;  // boundary nodes x m
  MatX k;  // s grid x m

  int terms() const { return static_cast<int>(h.cols()); }
  /// Full nodal force vector of space term j.
  VecX space_term(int j, int num_nodes, int dim) const;
  /// Full nodal force vector at s-grid node `s_index`.
  VecX assemble_at(int s_index, int num_nodes, int dim) const;
  /// Relative Frobenius error of the reconstruction against `load`.
  double reconstruction_error(const LoadMatrix& load) const;
};

/// Separates a load matrix into at most m_terms products. A delta load on
/// coincident grids is paired exactly (one indicator term per grid node).
/// Other profiles use a truncated SVD with the smallest m meeting `tol`
/// (relative Frobenius); ApproximationToleranceError when m_terms is too small.
SeparatedLoad separate_load(const LoadMatrix& load, int m_terms, double tol = 1e-12);

}  // namespace morph::mor
