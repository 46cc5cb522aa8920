#pragma once

#include "morph/fem/mesh.hpp"
#include "morph/mor/separated_solution.hpp"
#include "morph/rom/binding.hpp"

#include <vector>

namespace morph::rom {

/// Separated solution restricted to a fixed set of material points. The
/// space modes are interpolated to the points once; each evaluation is then
/// a rank-sized weight computation and one P x rank product.
///
/// Parameters outside the box are clamped (reported through `clamped`).
/// Sensitivities use the right-segment slope at interior knots and the
/// last segment's slope at the upper bound.
class ReducedEvaluator {
 public:
  ReducedEvaluator() = default;
  /// Points given by bindings; rejected bindings throw BindingError.
  ReducedEvaluator(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                   const std::vector<PointBinding>& points);
  /// Points given as mesh node ids.
  ReducedEvaluator(const mor::SeparatedSolution& sol, const std::vector<int>& nodes);

  int num_points() const { return static_cast<int>(modes_.rows() / 3); }
  int num_params() const { return sol_.parameter_space.size(); }
  int rank() const { return static_cast<int>(modes_.cols()); }
  const mor::ParameterSpace& parameter_space() const { return sol_.parameter_space; }

  /// Stacked 3D displacements (3 * num_points), parallel over points.
  VecX displacement(const VecX& mu, bool* clamped = nullptr) const;
  /// d displacement / d mu_k.
  VecX sensitivity(const VecX& mu, int k) const;
  /// All sensitivities, one column per parameter.
  MatX sensitivities(const VecX& mu) const;

  /// Single-threaded reference paths.
  VecX displacement_serial(const VecX& mu) const;
  MatX sensitivities_serial(const VecX& mu) const;

  /// Interpolated space modes of point p (3 x rank).
  MatX point_modes(int p) const { return modes_.middleRows(3 * p, 3); }

 private:
  void apply(const MatX& weights, MatX& out, bool parallel) const;

  mor::SeparatedSolution sol_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> modes_;
};

/// One-shot evaluation at bound points; returns one displacement per point.
std::vector<Vec3> evaluate_displacement(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                                        const std::vector<PointBinding>& points, const VecX& mu,
                                        bool* clamped = nullptr);
std::vector<Vec3> evaluate_displacement(const mor::SeparatedSolution& sol, const std::vector<int>& nodes,
                                        const VecX& mu, bool* clamped = nullptr);

std::vector<Vec3> evaluate_sensitivity(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                                       const std::vector<PointBinding>& points, const VecX& mu, int k);
std::vector<Vec3> evaluate_sensitivity(const mor::SeparatedSolution& sol, const std::vector<int>& nodes,
                                       const VecX& mu, int k);

}  // namespace morph::rom
