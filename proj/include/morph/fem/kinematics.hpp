#pragma once

#include "morph/core.hpp"
#include "morph/fem/mesh.hpp"

namespace morph::fem {

/// Kinematic quantities at one material point.
struct DeformationState {
  Mat3 F = Mat3::Identity();
  Mat3 C = Mat3::Identity();
  Mat3 Egl = Mat3::Zero();
  double Jdet = 1.0;

  static DeformationState from_gradient(const Mat3& F);

  /// First invariant of C (sum of squared principal stretches).
  double I1() const { return C.trace(); }
  /// Principal stretches, ascending.
  Vec3 principal_stretches() const;
  /// Small-strain tensor sym(F - I), used by the linear law.
  Mat3 small_strain() const;
};

/// 1/2 (F^T F - I).
Mat3 green_lagrange(const Mat3& F);

/// F = I + grad U at natural coordinates xi of element `element_id`.
/// Natural coordinates must lie in [-1, 1]^dim (1e-12 slack).
DeformationState deformation_gradient(const Mesh& mesh, const NodalField& u, int element_id,
                                      const Vec3& natural_coords);

}  // namespace morph::fem
