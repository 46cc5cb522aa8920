#pragma once

#include "morph/fem/mesh.hpp"
#include "morph/spatial/kdtree.hpp"

#include <vector>

namespace morph::rom {

enum class BindingStatus { Inside, NodeFallback, Rejected };

/// Where a material point sits in the CAD mesh.
struct PointBinding {
  BindingStatus status = BindingStatus::Rejected;
  int element = -1;        // host element (Inside)
  Vec3 xi = Vec3::Zero();  // natural coordinates (Inside)
  int node = -1;           // nearest node (NodeFallback)
  double distance = 0.0;   // distance to the closest point of the mesh

  bool fallback() const { return status == BindingStatus::NodeFallback; }
  bool usable() const { return status != BindingStatus::Rejected; }
};

struct BindOptions {
  double inside_tol = 1e-8;        // on natural coordinates
  double reject_fraction = 0.02;   // of the bounding-box diagonal
  int candidates = 12;             // elements tried, by centroid distance
};

class BindingError : public Error {
 public:
  using Error::Error;
};

/// Spatial index over a mesh's element centroids and nodes. The mesh must
/// outlive the locator.
class MeshLocator {
 public:
  explicit MeshLocator(const fem::Mesh& mesh);

  /// Binds one point given in the mesh's reference frame.
  PointBinding bind(const Vec3& p, const BindOptions& options = {}) const;

  const fem::Mesh& mesh() const { return *mesh_; }

 private:
  const fem::Mesh* mesh_;
  spatial::KdTree centroids_;
  spatial::KdTree nodes_;
  double diagonal_;
};

/// Natural coordinates of p in element e by Newton iteration on the
/// isoparametric map. Returns false when the iteration does not settle.
bool inverse_map(const fem::Mesh& mesh, int e, const Vec3& p, Vec3& xi);

/// Binds every point. Points farther than reject_fraction * diagonal from
/// the mesh are marked Rejected and excluded by the evaluators.
std::vector<PointBinding> bind_points(const fem::Mesh& mesh, const std::vector<Vec3>& points,
                                      const BindOptions& options = {});

/// Reference position of a bound point.
Vec3 bound_position(const fem::Mesh& mesh, const PointBinding& b);

}  // namespace morph::rom
