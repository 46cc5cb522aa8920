#pragma once

#include "morph/core.hpp"
#include "morph/fem/material.hpp"
#include "morph/fem/mesh.hpp"

#include <Eigen/SparseCore>

#include <map>
#include <optional>
#include <vector>

namespace morph::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// External actions. Tractions come from mesh.neumann; nodal forces and the
/// body force are added on top. `prescribed`, when set, replaces the values
/// of mesh.dirichlet (the constrained node set itself stays the mesh's).
struct Loads {
  Vec3 body_force = Vec3::Zero();
  std::map<int, Vec3> nodal_forces;
  bool use_mesh_tractions = true;
  std::optional<std::map<int, Vec3>> prescribed;
  double scale = 1.0;  // multiplies forces and prescribed displacements
};

/// Consistent nodal external force vector.
VecX external_forces(const Mesh& mesh, const Loads& loads);

struct AssemblyResult {
  NodalField residual;  // internal - external
  SparseMatrix tangent;
};

/// Residual and consistent tangent at displacement u. Element contributions
/// are computed in parallel and scattered in element order, so the result
/// is bit-identical to assemble_serial for any thread count.
AssemblyResult assemble(const Mesh& mesh, const MaterialLaw& law, const NodalField& u,
                        const Loads& loads);

/// Single-threaded reference path.
AssemblyResult assemble_serial(const Mesh& mesh, const MaterialLaw& law, const NodalField& u,
                               const Loads& loads);

/// Element internal force vector and tangent (npe * dim).
void element_contribution(const Mesh& mesh, const MaterialLaw& law, const NodalField& u, int e,
                          VecX& fint, MatX& ke);

/// Partition of dofs into free and Dirichlet-constrained sets.
struct DofPartition {
  std::vector<int> free;
  std::vector<int> fixed;
  std::vector<int> free_index;  // dof -> position in `free`, -1 when fixed

  explicit DofPartition(const Mesh& mesh);
  VecX restrict_free(const VecX& full) const;
  VecX restrict_fixed(const VecX& full) const;
  SparseMatrix block(const SparseMatrix& k, bool rows_free, bool cols_free) const;
};

}  // namespace morph::fem
