#include "morph/fem/mesh.hpp"

#include "morph/fem/shape.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace morph::fem {

std::string to_string(ElementKind kind) { return kind == ElementKind::Quad4 ? "quad4" : "hex8"; }

ElementKind element_kind_from_string(const std::string& name) {
  if (name == "quad4" || name == "quad4-2D") return ElementKind::Quad4;
  if (name == "hex8" || name == "hex8-3D") return ElementKind::Hex8;
  throw ArgumentError("unknown element kind '" + name + "'");
}

Mesh::Mesh(ElementKind kind, std::vector<Vec3> nodes, std::vector<std::array<int, 8>> elements)
    : kind_(kind), nodes_(std::move(nodes)), elements_(std::move(elements)) {}

MatX Mesh::element_coords(int e) const {
  const int npe = nodes_per_element();
  MatX x(dim(), npe);
  for (int a = 0; a < npe; ++a) x.col(a) = nodes_[elements_[e][a]].head(dim());
  return x;
}

double Mesh::bounding_box_diagonal() const {
  if (nodes_.empty()) return 0.0;
  Vec3 lo = nodes_.front(), hi = nodes_.front();
  for (const auto& p : nodes_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

void Mesh::validate() const {
  const int npe = nodes_per_element();
  for (int e = 0; e < num_elements(); ++e) {
    for (int a = 0; a < npe; ++a) {
      const int id = elements_[e][a];
      if (id < 0 || id >= num_nodes()) {
        throw GeometryError("element " + std::to_string(e) + " references node " +
                            std::to_string(id) + " out of range");
      }
    }
    const MatX coords = element_coords(e);
    for (const auto& qp : gauss_points(kind_)) point_geometry(kind_, coords, qp.xi, e);
  }
  for (const auto& [id, _] : dirichlet) {
    if (id < 0 || id >= num_nodes()) throw GeometryError("Dirichlet node out of range");
  }
  for (const auto& f : neumann) {
    for (int id : f.nodes) {
      if (id < 0 || id >= num_nodes()) throw GeometryError("Neumann facet node out of range");
    }
  }
}

Mesh make_cantilever_2d(double length, double height, int nx, int ny) {
  std::vector<Vec3> nodes;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes.emplace_back(length * i / nx, height * j / ny, 0.0);
  std::vector<std::array<int, 8>> elems;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::array<int, 8> el{};
      el.fill(-1);
      el[0] = cantilever_node(nx, i, j);
      el[1] = cantilever_node(nx, i + 1, j);
      el[2] = cantilever_node(nx, i + 1, j + 1);
      el[3] = cantilever_node(nx, i, j + 1);
      elems.push_back(el);
    }
  Mesh mesh(ElementKind::Quad4, std::move(nodes), std::move(elems));
  for (int j = 0; j <= ny; ++j) mesh.dirichlet[cantilever_node(nx, 0, j)] = Vec3::Zero();
  return mesh;
}

namespace {

std::vector<std::array<int, 8>> box_connectivity(int nx, int ny, int nz) {
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  std::vector<std::array<int, 8>> elems;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        elems.push_back({id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                         id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                         id(i, j + 1, k + 1)});
  return elems;
}

}  // namespace

Mesh make_box_3d(double lx, double ly, double lz, int nx, int ny, int nz) {
  std::vector<Vec3> nodes;
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        nodes.emplace_back(lx * i / nx, ly * j / ny, lz * k / nz);
  return Mesh(ElementKind::Hex8, std::move(nodes), box_connectivity(nx, ny, nz));
}

Mesh make_twisted_column(double width, double height, int n_side, int n_height, double twist_rad) {
  std::vector<Vec3> nodes;
  for (int k = 0; k <= n_height; ++k) {
    const double z = height * k / n_height;
    const double a = twist_rad * k / n_height;
    const double c = std::cos(a), s = std::sin(a);
    for (int j = 0; j <= n_side; ++j)
      for (int i = 0; i <= n_side; ++i) {
        const double x = width * (static_cast<double>(i) / n_side - 0.5);
        const double y = width * (static_cast<double>(j) / n_side - 0.5);
        nodes.emplace_back(c * x - s * y, s * x + c * y, z);
      }
  }
  Mesh mesh(ElementKind::Hex8, std::move(nodes), box_connectivity(n_side, n_side, n_height));
  for (int n = 0; n < (n_side + 1) * (n_side + 1); ++n) mesh.dirichlet[n] = Vec3::Zero();
  return mesh;
}

std::vector<BoundaryFace> boundary_faces(const Mesh& mesh) {
  // Local faces as corner index lists, ordered so the right-hand normal points outward.
  static const std::vector<std::vector<int>> hex_faces = {
      {0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4}, {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
  static const std::vector<std::vector<int>> quad_faces = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const auto& local = mesh.kind() == ElementKind::Hex8 ? hex_faces : quad_faces;

  std::map<std::vector<int>, std::pair<int, int>> count;  // sorted ids -> (element, local face)
  std::map<std::vector<int>, int> multiplicity;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int f = 0; f < static_cast<int>(local.size()); ++f) {
      std::vector<int> ids;
      for (int a : local[f]) ids.push_back(mesh.element(e)[a]);
      std::sort(ids.begin(), ids.end());
      count.emplace(ids, std::make_pair(e, f));
      ++multiplicity[ids];
    }
  }
  std::vector<BoundaryFace> out;
  for (const auto& [key, ef] : count) {
    if (multiplicity[key] != 1) continue;
    const auto [e, f] = ef;
    BoundaryFace bf;
    bf.element = e;
    for (int a : local[f]) bf.nodes.push_back(mesh.element(e)[a]);
    bf.centroid = Vec3::Zero();
    for (int id : bf.nodes) bf.centroid += mesh.node(id);
    bf.centroid /= static_cast<double>(bf.nodes.size());
    if (mesh.kind() == ElementKind::Hex8) {
      const Vec3 d1 = mesh.node(bf.nodes[2]) - mesh.node(bf.nodes[0]);
      const Vec3 d2 = mesh.node(bf.nodes[3]) - mesh.node(bf.nodes[1]);
      bf.normal = d1.cross(d2).normalized();
    } else {
      const Vec3 t = mesh.node(bf.nodes[1]) - mesh.node(bf.nodes[0]);
      bf.normal = Vec3(t.y(), -t.x(), 0.0).normalized();
    }
    out.push_back(std::move(bf));
  }
  // Deterministic order: by element, then first node.
  std::sort(out.begin(), out.end(), [](const BoundaryFace& a, const BoundaryFace& b) {
    return a.element != b.element ? a.element < b.element : a.nodes < b.nodes;
  });
  return out;
}

}  // namespace morph::fem
