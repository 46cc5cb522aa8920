#include "morph/fem/postprocess.hpp"

#include "morph/fem/kinematics.hpp"
#include "morph/fem/shape.hpp"

namespace morph::fem {

VecX nodal_von_mises(const Mesh& mesh, const MaterialLaw& law, const NodalField& u) {
  if (u.values.size() != mesh.num_dofs()) throw ArgumentError("displacement field does not match the mesh");
  VecX sum = VecX::Zero(mesh.num_nodes());
  VecX count = VecX::Zero(mesh.num_nodes());
  const int npe = nodes_per_element(mesh.kind());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int a = 0; a < npe; ++a) {
      const auto& c = kCorners[a];
      const Vec3 xi(c[0], c[1], mesh.dim() == 3 ? c[2] : 0.0);
      const int node = mesh.element(e)[a];
      sum[node] += pk2_stress(law, deformation_gradient(mesh, u, e, xi)).von_mises();
      count[node] += 1.0;
    }
  }
  return sum.cwiseQuotient(count.cwiseMax(1.0));
}

}  // namespace morph::fem
