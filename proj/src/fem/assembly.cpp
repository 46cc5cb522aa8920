#include "morph/fem/assembly.hpp"

#include "morph/fem/shape.hpp"

#include <omp.h>

#include <cmath>
#include <exception>

namespace morph::fem {

void element_contribution(const Mesh& mesh, const MaterialLaw& law, const NodalField& u, int e,
                          VecX& fint, MatX& ke) {
  const ElementKind kind = mesh.kind();
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const int ndof = npe * dim;
  const auto& conn = mesh.element(e);
  const MatX coords = mesh.element_coords(e);

  MatX ue(dim, npe);
  for (int a = 0; a < npe; ++a) ue.col(a) = u.at(conn[a]).head(dim);

  fint.setZero(ndof);
  ke.setZero(ndof, ndof);
  Mat3 P;
  Tangent9 A;
  for (const auto& qp : gauss_points(kind)) {
    const PointGeometry pg = point_geometry(kind, coords, qp.xi, e);
    const double dv = qp.weight * pg.det_j;
    Mat3 F = Mat3::Identity();
    F.topLeftCorner(dim, dim) += ue * pg.dn_dx.transpose();
    try {
      first_piola_with_tangent(law, F, P, A);
    } catch (const InadmissibleStateError& err) {
      throw InadmissibleStateError(std::string(err.what()) + " in element " + std::to_string(e),
                                   e);
    }
    for (int a = 0; a < npe; ++a)
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int J = 0; J < dim; ++J) s += P(i, J) * pg.dn_dx(J, a);
        fint[a * dim + i] += s * dv;
      }
    // ke(a i, b k) = dN_a/dX_J A_iJkL dN_b/dX_L
    for (int a = 0; a < npe; ++a)
      for (int i = 0; i < dim; ++i) {
        Eigen::Matrix<double, 3, 3> g = Eigen::Matrix<double, 3, 3>::Zero();  // g(k, L)
        for (int J = 0; J < dim; ++J) {
          const double da = pg.dn_dx(J, a);
          for (int k = 0; k < dim; ++k)
            for (int L = 0; L < dim; ++L) g(k, L) += da * A(3 * i + J, 3 * k + L);
        }
        for (int b = 0; b < npe; ++b)
          for (int k = 0; k < dim; ++k) {
            double s = 0.0;
            for (int L = 0; L < dim; ++L) s += g(k, L) * pg.dn_dx(L, b);
            ke(a * dim + i, b * dim + k) += s * dv;
          }
      }
  }
}

VecX external_forces(const Mesh& mesh, const Loads& loads) {
  const int dim = mesh.dim();
  VecX f = VecX::Zero(mesh.num_dofs());
  const double g = 1.0 / std::sqrt(3.0);

  if (loads.use_mesh_tractions) {
    for (const auto& facet : mesh.neumann) {
      const int nn = static_cast<int>(facet.nodes.size());
      if (dim == 2) {
        if (nn != 2) throw GeometryError("2D traction facets must have 2 nodes");
        const Vec3 x0 = mesh.node(facet.nodes[0]), x1 = mesh.node(facet.nodes[1]);
        const double half_len = 0.5 * (x1 - x0).head(2).norm();
        for (double s : {-g, g}) {
          const double n0 = 0.5 * (1 - s), n1 = 0.5 * (1 + s);
          for (int c = 0; c < 2; ++c) {
            f[facet.nodes[0] * dim + c] += n0 * facet.traction[c] * half_len;
            f[facet.nodes[1] * dim + c] += n1 * facet.traction[c] * half_len;
          }
        }
      } else {
        if (nn != 4) throw GeometryError("3D traction facets must have 4 nodes");
        for (double s : {-g, g})
          for (double t : {-g, g}) {
            const double n[4] = {0.25 * (1 - s) * (1 - t), 0.25 * (1 + s) * (1 - t),
                                 0.25 * (1 + s) * (1 + t), 0.25 * (1 - s) * (1 + t)};
            const double ds[4] = {-0.25 * (1 - t), 0.25 * (1 - t), 0.25 * (1 + t), -0.25 * (1 + t)};
            const double dt[4] = {-0.25 * (1 - s), -0.25 * (1 + s), 0.25 * (1 + s), 0.25 * (1 - s)};
            Vec3 xs = Vec3::Zero(), xt = Vec3::Zero();
            for (int a = 0; a < 4; ++a) {
              xs += ds[a] * mesh.node(facet.nodes[a]);
              xt += dt[a] * mesh.node(facet.nodes[a]);
            }
            const double area = xs.cross(xt).norm();
            for (int a = 0; a < 4; ++a)
              for (int c = 0; c < 3; ++c) f[facet.nodes[a] * 3 + c] += n[a] * facet.traction[c] * area;
          }
      }
    }
  }

  if (!loads.body_force.isZero()) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const MatX coords = mesh.element_coords(e);
      for (const auto& qp : gauss_points(mesh.kind())) {
        const PointGeometry pg = point_geometry(mesh.kind(), coords, qp.xi, e);
        for (int a = 0; a < mesh.nodes_per_element(); ++a)
          for (int c = 0; c < dim; ++c)
            f[mesh.element(e)[a] * dim + c] += pg.n[a] * loads.body_force[c] * qp.weight * pg.det_j;
      }
    }
  }

  for (const auto& [node, force] : loads.nodal_forces) {
    if (node < 0 || node >= mesh.num_nodes()) throw ArgumentError("nodal force on unknown node");
    for (int c = 0; c < dim; ++c) f[node * dim + c] += force[c];
  }
  return f * loads.scale;
}

namespace {

void scatter(const Mesh& mesh, int e, const VecX& fe, const MatX& ke, VecX& fint,
             std::vector<Eigen::Triplet<double>>& trip) {
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const auto& conn = mesh.element(e);
  for (int a = 0; a < npe; ++a)
    for (int i = 0; i < dim; ++i) {
      const int r = conn[a] * dim + i;
      fint[r] += fe[a * dim + i];
      for (int b = 0; b < npe; ++b)
        for (int k = 0; k < dim; ++k) trip.emplace_back(r, conn[b] * dim + k, ke(a * dim + i, b * dim + k));
    }
}

AssemblyResult finish(const Mesh& mesh, const Loads& loads, VecX fint,
                      const std::vector<Eigen::Triplet<double>>& trip) {
  AssemblyResult out;
  out.residual = NodalField(fint - external_forces(mesh, loads), mesh.dim());
  out.tangent.resize(mesh.num_dofs(), mesh.num_dofs());
  out.tangent.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void check_inputs(const Mesh& mesh, const NodalField& u) {
  if (u.values.size() != mesh.num_dofs()) throw ArgumentError("nodal field size mismatch");
}

}  // namespace

AssemblyResult assemble_serial(const Mesh& mesh, const MaterialLaw& law, const NodalField& u,
                               const Loads& loads) {
  check_inputs(mesh, u);
  const int ndof_e = mesh.nodes_per_element() * mesh.dim();
  VecX fint = VecX::Zero(mesh.num_dofs());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.num_elements()) * ndof_e * ndof_e);
  VecX fe;
  MatX ke;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    element_contribution(mesh, law, u, e, fe, ke);
    scatter(mesh, e, fe, ke, fint, trip);
  }
  return finish(mesh, loads, std::move(fint), trip);
}

AssemblyResult assemble(const Mesh& mesh, const MaterialLaw& law, const NodalField& u,
                        const Loads& loads) {
  check_inputs(mesh, u);
  const int ne = mesh.num_elements();
  const int ndof_e = mesh.nodes_per_element() * mesh.dim();
  std::vector<VecX> fes(ne);
  std::vector<MatX> kes(ne);
  std::vector<std::exception_ptr> failures(ne);

#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    try {
      element_contribution(mesh, law, u, e, fes[e], kes[e]);
    } catch (...) {
      failures[e] = std::current_exception();
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (failures[e]) std::rethrow_exception(failures[e]);
  }

  VecX fint = VecX::Zero(mesh.num_dofs());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(ne) * ndof_e * ndof_e);
  for (int e = 0; e < ne; ++e) scatter(mesh, e, fes[e], kes[e], fint, trip);
  return finish(mesh, loads, std::move(fint), trip);
}

DofPartition::DofPartition(const Mesh& mesh) {
  const int dim = mesh.dim();
  free_index.assign(mesh.num_dofs(), -1);
  std::vector<char> is_fixed(mesh.num_dofs(), 0);
  for (const auto& [node, _] : mesh.dirichlet)
    for (int c = 0; c < dim; ++c) is_fixed[node * dim + c] = 1;
  for (int d = 0; d < mesh.num_dofs(); ++d) {
    if (is_fixed[d]) {
      fixed.push_back(d);
    } else {
      free_index[d] = static_cast<int>(free.size());
      free.push_back(d);
    }
  }
}

VecX DofPartition::restrict_free(const VecX& full) const {
  VecX out(free.size());
  for (size_t i = 0; i < free.size(); ++i) out[i] = full[free[i]];
  return out;
}

VecX DofPartition::restrict_fixed(const VecX& full) const {
  VecX out(fixed.size());
  for (size_t i = 0; i < fixed.size(); ++i) out[i] = full[fixed[i]];
  return out;
}

SparseMatrix DofPartition::block(const SparseMatrix& k, bool rows_free, bool cols_free) const {
  const int n = static_cast<int>(free_index.size());
  std::vector<int> row_map(n, -1), col_map(n, -1);
  int nr = 0, nc = 0;
  for (int d = 0; d < n; ++d) {
    const bool f = free_index[d] >= 0;
    if (f == rows_free) row_map[d] = nr++;
    if (f == cols_free) col_map[d] = nc++;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < k.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(k, c); it; ++it) {
      const int r = row_map[it.row()], cc = col_map[it.col()];
      if (r >= 0 && cc >= 0) trip.emplace_back(r, cc, it.value());
    }
  SparseMatrix out(nr, nc);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace morph::fem
