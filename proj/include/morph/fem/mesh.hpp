#pragma once

#include "morph/core.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace morph::fem {

enum class ElementKind { Quad4, Hex8 };

inline int spatial_dim(ElementKind kind) { return kind == ElementKind::Quad4 ? 2 : 3; }
inline int nodes_per_element(ElementKind kind) { return kind == ElementKind::Quad4 ? 4 : 8; }

std::string to_string(ElementKind kind);
ElementKind element_kind_from_string(const std::string& name);

/// Boundary facet (segment for quad4 meshes, quadrilateral for hex8 meshes)
/// carrying a uniform traction per unit reference area (length in 2D).
struct TractionFacet {
  std::vector<int> nodes;
  Vec3 traction = Vec3::Zero();
};

/// Finite-element discretization of the reference body.
///
/// Element connectivity follows the usual counter-clockwise ordering: quad4
/// nodes at natural corners (-1,-1),(1,-1),(1,1),(-1,1); hex8 adds the same
/// pattern on the zeta = +1 face. 2D meshes use plane strain with unit
/// thickness and ignore z components of nodal data.
class Mesh {
 public:
  Mesh() = default;
  Mesh(ElementKind kind, std::vector<Vec3> nodes, std::vector<std::array<int, 8>> elements);

  ElementKind kind() const { return kind_; }
  int dim() const { return spatial_dim(kind_); }
  int nodes_per_element() const { return fem::nodes_per_element(kind_); }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_dofs() const { return num_nodes() * dim(); }

  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Vec3& node(int i) const { return nodes_[i]; }
  const std::array<int, 8>& element(int e) const { return elements_[e]; }
  const std::vector<std::array<int, 8>>& elements() const { return elements_; }

  /// Prescribed displacement per constrained node (all components).
  std::map<int, Vec3> dirichlet;
  std::vector<TractionFacet> neumann;

  /// Reference coordinates of element e as a dim x npe matrix.
  MatX element_coords(int e) const;
  double bounding_box_diagonal() const;

  /// Checks index ranges and positive reference Jacobians at every Gauss
  /// point. Throws GeometryError naming the first offending element.
  void validate() const;

 private:
  ElementKind kind_ = ElementKind::Hex8;
  std::vector<Vec3> nodes_;
  std::vector<std::array<int, 8>> elements_;
};

/// Nodal vector field (displacements). Stored flat, node-major.
struct NodalField {
  VecX values;
  int dim = 3;

  NodalField() = default;
  explicit NodalField(const Mesh& mesh) : values(VecX::Zero(mesh.num_dofs())), dim(mesh.dim()) {}
  NodalField(VecX v, int d) : values(std::move(v)), dim(d) {}

  int num_nodes() const { return static_cast<int>(values.size()) / dim; }
  Vec3 at(int node) const {
    Vec3 u = Vec3::Zero();
    for (int c = 0; c < dim; ++c) u[c] = values[node * dim + c];
    return u;
  }
  void set(int node, const Vec3& u) {
    for (int c = 0; c < dim; ++c) values[node * dim + c] = u[c];
  }
};

// Structured meshes used by the presets and tests.

/// nx x ny quad4 grid of [0,length] x [0,height]; left edge (x = 0) clamped.
Mesh make_cantilever_2d(double length, double height, int nx, int ny);

/// Index of the node at grid position (i, j) of make_cantilever_2d.
inline int cantilever_node(int nx, int i, int j) { return j * (nx + 1) + i; }

/// nx x ny x nz hex8 block of [0,lx] x [0,ly] x [0,lz].
Mesh make_box_3d(double lx, double ly, double lz, int nx, int ny, int nz);

/// Square-section column centred on the z axis whose cross-section rotates
/// linearly with height by `twist_rad`. Base (z = 0) is clamped.
Mesh make_twisted_column(double width, double height, int n_side, int n_height, double twist_rad);

/// Boundary faces (quads for hex8, segments for quad4) with outward normals
/// in the reference configuration.
struct BoundaryFace {
  int element;
  std::vector<int> nodes;
  Vec3 normal;
  Vec3 centroid;
};
std::vector<BoundaryFace> boundary_faces(const Mesh& mesh);

}  // namespace morph::fem
