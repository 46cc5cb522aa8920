#include "morph/fem/kinematics.hpp"

#include "morph/fem/shape.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace morph::fem {

Mat3 green_lagrange(const Mat3& F) { return 0.5 * (F.transpose() * F - Mat3::Identity()); }

DeformationState DeformationState::from_gradient(const Mat3& F) {
  DeformationState s;
  s.F = F;
  s.C = F.transpose() * F;
  s.Egl = 0.5 * (s.C - Mat3::Identity());
  s.Jdet = F.determinant();
  return s;
}

Vec3 DeformationState::principal_stretches() const {
  Eigen::SelfAdjointEigenSolver<Mat3> es(C);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

Mat3 DeformationState::small_strain() const {
  const Mat3 h = F - Mat3::Identity();
  return 0.5 * (h + h.transpose());
}

DeformationState deformation_gradient(const Mesh& mesh, const NodalField& u, int element_id,
                                      const Vec3& natural_coords) {
  if (element_id < 0 || element_id >= mesh.num_elements()) {
    throw ArgumentError("element id out of range");
  }
  const int dim = mesh.dim();
  for (int d = 0; d < dim; ++d) {
    if (std::abs(natural_coords[d]) > 1.0 + 1e-12) {
      throw ArgumentError("natural coordinates outside the reference element");
    }
  }
  if (u.values.size() != mesh.num_dofs()) throw ArgumentError("nodal field size mismatch");

  const PointGeometry pg =
      point_geometry(mesh.kind(), mesh.element_coords(element_id), natural_coords, element_id);
  Mat3 F = Mat3::Identity();
  const auto& conn = mesh.element(element_id);
  for (int a = 0; a < mesh.nodes_per_element(); ++a) {
    const Vec3 ua = u.at(conn[a]);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) F(i, j) += ua[i] * pg.dn_dx(j, a);
  }
  return DeformationState::from_gradient(F);
}

}  // namespace morph::fem
