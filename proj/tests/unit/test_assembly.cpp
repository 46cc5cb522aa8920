#include "morph/fem/assembly.hpp"
#include "morph/fem/shape.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <omp.h>

using namespace morph;
using namespace morph::fem;

namespace {

// Classical small-strain stiffness K = sum B^T D B (Voigt notation), built
// independently of the tensor-contraction path used by assemble().
MatX voigt_stiffness(const Mesh& mesh, double E, double nu) {
  const int dim = mesh.dim();
  const int nv = dim == 2 ? 3 : 6;
  MatX D = MatX::Zero(nv, nv);
  const double c = E / ((1 + nu) * (1 - 2 * nu));
  if (dim == 2) {
    D << 1 - nu, nu, 0, nu, 1 - nu, 0, 0, 0, 0.5 - nu;
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) D(i, j) = i == j ? 1 - nu : nu;
    for (int i = 3; i < 6; ++i) D(i, i) = 0.5 - nu;
  }
  D *= c;
  MatX K = MatX::Zero(mesh.num_dofs(), mesh.num_dofs());
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (const auto& qp : gauss_points(mesh.kind())) {
      const auto pg = point_geometry(mesh.kind(), mesh.element_coords(e), qp.xi);
      MatX B = MatX::Zero(nv, npe * dim);
      for (int a = 0; a < npe; ++a) {
        const double dx = pg.dn_dx(0, a), dy = pg.dn_dx(1, a);
        if (dim == 2) {
          B(0, 2 * a) = dx;
          B(1, 2 * a + 1) = dy;
          B(2, 2 * a) = dy;
          B(2, 2 * a + 1) = dx;
        } else {
          const double dz = pg.dn_dx(2, a);
          B(0, 3 * a) = dx;
          B(1, 3 * a + 1) = dy;
          B(2, 3 * a + 2) = dz;
          B(3, 3 * a) = dy;
          B(3, 3 * a + 1) = dx;
          B(4, 3 * a + 1) = dz;
          B(4, 3 * a + 2) = dy;
          B(5, 3 * a) = dz;
          B(5, 3 * a + 2) = dx;
        }
      }
      const MatX ke = B.transpose() * D * B * qp.weight * pg.det_j;
      for (int a = 0; a < npe; ++a)
        for (int b = 0; b < npe; ++b)
          K.block(mesh.element(e)[a] * dim, mesh.element(e)[b] * dim, dim, dim) +=
              ke.block(a * dim, b * dim, dim, dim);
    }
  }
  return K;
}

Mesh distorted_box(uint64_t seed) {
  Mesh box = make_box_3d(1.0, 0.8, 0.6, 2, 2, 2);
  auto rng = testing::make_rng(seed);
  std::vector<Vec3> nodes = box.nodes();
  for (auto& p : nodes) p += 0.05 * testing::random_vec3(rng);
  return Mesh(ElementKind::Hex8, nodes, box.elements());
}

Loads no_loads() {
  Loads l;
  l.use_mesh_tractions = false;
  return l;
}

MatX fd_tangent(const Mesh& mesh, const MaterialLaw& law, const NodalField& u, double h) {
  MatX K(mesh.num_dofs(), mesh.num_dofs());
  for (int d = 0; d < mesh.num_dofs(); ++d) {
    NodalField up = u, um = u;
    up.values[d] += h;
    um.values[d] -= h;
    K.col(d) = (assemble(mesh, law, up, no_loads()).residual.values -
                assemble(mesh, law, um, no_loads()).residual.values) /
               (2 * h);
  }
  return K;
}

}  // namespace

TEST_CASE("reference state without loads is in equilibrium") {
  const Mesh mesh = distorted_box(1);
  const auto r = assemble(mesh, MaterialLaw::neo_hookean(1.0, 1.0), NodalField(mesh), no_loads());
  CHECK(r.residual.values.norm() == 0.0);
}

TEST_CASE("linear tangent equals the classical B^T D B stiffness") {
  const double E = 210.0, nu = 0.3;
  SUBCASE("hex8") {
    const Mesh mesh = distorted_box(2);
    const MatX K = MatX(assemble(mesh, MaterialLaw::linear(E, nu), NodalField(mesh), no_loads()).tangent);
    CHECK(testing::rel_error(K, voigt_stiffness(mesh, E, nu)) < 1e-12);
  }
  SUBCASE("quad4 plane strain") {
    const Mesh mesh = make_cantilever_2d(3.0, 1.0, 3, 2);
    const MatX K = MatX(assemble(mesh, MaterialLaw::linear(E, nu), NodalField(mesh), no_loads()).tangent);
    CHECK(testing::rel_error(K, voigt_stiffness(mesh, E, nu)) < 1e-12);
  }
  SUBCASE("neo-hookean linearizes to the same stiffness") {
    const Mesh mesh = distorted_box(3);
    const auto nh = MaterialLaw::neo_hookean_from_young(E, nu);
    const MatX K = MatX(assemble(mesh, nh, NodalField(mesh), no_loads()).tangent);
    CHECK(testing::rel_error(K, voigt_stiffness(mesh, E, nu)) < 1e-12);
  }
}

TEST_CASE("tangent matches finite differences of the residual") {
  auto rng = testing::make_rng(17);
  const auto law = MaterialLaw::neo_hookean(2.0, 1.0);
  SUBCASE("two hex8 elements") {
    const Mesh mesh = make_box_3d(2.0, 1.0, 1.0, 2, 1, 1);
    NodalField u(mesh);
    for (int d = 0; d < mesh.num_dofs(); ++d) u.values[d] = testing::uniform(rng, -0.1, 0.1);
    const MatX K = MatX(assemble(mesh, law, u, no_loads()).tangent);
    CHECK(testing::rel_error(K, fd_tangent(mesh, law, u, 1e-6)) < 1e-5);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-12 * K.cwiseAbs().maxCoeff());
  }
  SUBCASE("eight quad4 elements") {
    const Mesh mesh = make_cantilever_2d(4.0, 2.0, 4, 2);
    NodalField u(mesh);
    for (int d = 0; d < mesh.num_dofs(); ++d) u.values[d] = testing::uniform(rng, -0.1, 0.1);
    const MatX K = MatX(assemble(mesh, law, u, no_loads()).tangent);
    CHECK(testing::rel_error(K, fd_tangent(mesh, law, u, 1e-6)) < 1e-5);
  }
}

TEST_CASE("parallel assembly is bit-identical to the serial reference") {
  const Mesh mesh = distorted_box(4);
  auto rng = testing::make_rng(8);
  NodalField u(mesh);
  for (int d = 0; d < mesh.num_dofs(); ++d) u.values[d] = testing::uniform(rng, -0.05, 0.05);
  const auto law = MaterialLaw::neo_hookean(1.0, 0.5);
  const auto ref = assemble_serial(mesh, law, u, no_loads());
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    const auto par = assemble(mesh, law, u, no_loads());
    CHECK((par.residual.values.array() == ref.residual.values.array()).all());
    CHECK((MatX(par.tangent).array() == MatX(ref.tangent).array()).all());
  }
}

TEST_CASE("inverted element during assembly is reported by id") {
  const Mesh mesh = make_box_3d(2.0, 1.0, 1.0, 2, 1, 1);
  NodalField u(mesh);
  // Collapse the second element through itself along x.
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (mesh.node(n).x() > 1.5) u.set(n, Vec3(-1.6, 0, 0));
  try {
    assemble(mesh, MaterialLaw::neo_hookean(1.0, 1.0), u, no_loads());
    FAIL("expected InadmissibleStateError");
  } catch (const InadmissibleStateError& err) {
    CHECK(err.element() == 1);
  }
}

TEST_CASE("external forces integrate tractions, body force and nodal loads") {
  Mesh mesh = make_box_3d(2.0, 1.0, 1.0, 2, 1, 1);
  // Traction on the x = 2 face.
  std::vector<int> face;
  for (int n = 0; n < mesh.num_nodes(); ++n)
    if (mesh.node(n).x() > 1.99) face.push_back(n);
  REQUIRE(face.size() == 4);
  mesh.neumann.push_back({{face[0], face[1], face[3], face[2]}, Vec3(0, 0, -3.0)});
  Loads loads;
  loads.body_force = Vec3(0.5, 0, 0);
  loads.nodal_forces[0] = Vec3(0, 2.0, 0);
  const VecX f = external_forces(mesh, loads);
  Vec3 total = Vec3::Zero();
  for (int n = 0; n < mesh.num_nodes(); ++n) total += f.segment<3>(3 * n);
  CHECK(total.x() == doctest::Approx(0.5 * 2.0));  // body force * volume
  CHECK(total.y() == doctest::Approx(2.0));
  CHECK(total.z() == doctest::Approx(-3.0 * 1.0));  // traction * area
}
