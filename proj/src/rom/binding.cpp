#include "morph/rom/binding.hpp"

#include "morph/fem/shape.hpp"

#include <cmath>
#include <limits>

namespace morph::rom {

namespace {

Vec3 map_point(const fem::Mesh& mesh, int e, const Vec3& xi) {
  const VecX n = fem::shape_values(mesh.kind(), xi);
  const auto& conn = mesh.element(e);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < n.size(); ++a) x += n[a] * mesh.node(conn[a]);
  return x;
}

Vec3 clamp_natural(const Vec3& xi, int dim) {
  Vec3 c = xi.cwiseMax(-1.0).cwiseMin(1.0);
  if (dim == 2) c.z() = 0.0;
  return c;
}

}  // namespace

bool inverse_map(const fem::Mesh& mesh, int e, const Vec3& p, Vec3& xi) {
  const int dim = mesh.dim();
  const MatX coords = mesh.element_coords(e);  // dim x npe
  const double size = (coords.rowwise().maxCoeff() - coords.rowwise().minCoeff()).norm();
  xi.setZero();
  for (int it = 0; it < 30; ++it) {
    const Vec3 r = map_point(mesh, e, xi) - p;
    const MatX jac = coords * fem::shape_gradients(mesh.kind(), xi).transpose();  // dX/dxi
    const VecX step = jac.partialPivLu().solve(r.head(dim));
    for (int c = 0; c < dim; ++c) xi[c] -= step[c];
    if (!xi.allFinite() || xi.cwiseAbs().maxCoeff() > 1e3) return false;
    if (step.norm() <= 1e-14 * (1.0 + xi.norm()) || r.head(dim).norm() <= 1e-14 * size) {
      return true;
    }
  }
  return (map_point(mesh, e, xi) - p).head(dim).norm() <= 1e-10 * size;
}

MeshLocator::MeshLocator(const fem::Mesh& mesh)
    : mesh_(&mesh), nodes_(mesh.nodes()), diagonal_(mesh.bounding_box_diagonal()) {
  std::vector<Vec3> c;
  c.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    Vec3 s = Vec3::Zero();
    for (int a = 0; a < mesh.nodes_per_element(); ++a) s += mesh.node(mesh.element(e)[a]);
    c.push_back(s / mesh.nodes_per_element());
  }
  centroids_ = spatial::KdTree(std::move(c));
}

PointBinding MeshLocator::bind(const Vec3& p_in, const BindOptions& options) const {
  const fem::Mesh& mesh = *mesh_;
  const int dim = mesh.dim();
  Vec3 p = p_in;
  if (dim == 2) p.z() = 0.0;
  PointBinding out;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& hit : centroids_.knearest(p, options.candidates)) {
    Vec3 xi;
    const bool ok = inverse_map(mesh, hit.index, p, xi);
    if (ok && xi.head(dim).cwiseAbs().maxCoeff() <= 1.0 + options.inside_tol) {
      out.status = BindingStatus::Inside;
      out.element = hit.index;
      out.xi = xi;
      out.distance = 0.0;
      return out;
    }
    // Outside this element: distance to its clamped image approximates the
    // distance to the element.
    const Vec3 guess = ok ? clamp_natural(xi, dim) : Vec3::Zero();
    best_dist = std::min(best_dist, (map_point(mesh, hit.index, guess) - p).norm());
  }
  out.distance = best_dist;
  if (best_dist > options.reject_fraction * diagonal_) {
    out.status = BindingStatus::Rejected;
    return out;
  }
  out.status = BindingStatus::NodeFallback;
  out.node = nodes_.nearest(p).index;
  return out;
}

std::vector<PointBinding> bind_points(const fem::Mesh& mesh, const std::vector<Vec3>& points,
                                      const BindOptions& options) {
  const MeshLocator loc(mesh);
  std::vector<PointBinding> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(loc.bind(p, options));
  return out;
}

Vec3 bound_position(const fem::Mesh& mesh, const PointBinding& b) {
  switch (b.status) {
    case BindingStatus::Inside: return map_point(mesh, b.element, b.xi);
    case BindingStatus::NodeFallback: return mesh.node(b.node);
    case BindingStatus::Rejected: break;
  }
  throw BindingError("rejected point has no position");
}

}  // namespace morph::rom
