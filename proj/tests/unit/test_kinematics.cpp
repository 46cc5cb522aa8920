#include "morph/fem/kinematics.hpp"
#include "morph/fem/mesh.hpp"
#include "morph/fem/shape.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace morph;
using namespace morph::fem;

TEST_CASE("deformation gradient of the reference state is the identity") {
  const Mesh mesh = make_box_3d(1.0, 2.0, 0.5, 2, 1, 1);
  const NodalField u(mesh);
  const auto s = deformation_gradient(mesh, u, 1, Vec3(0.3, -0.2, 0.7));
  CHECK(s.F.isApprox(Mat3::Identity()));
  CHECK(s.C.isApprox(Mat3::Identity()));
  CHECK(s.Egl.norm() == doctest::Approx(0.0));
  CHECK(s.Jdet == doctest::Approx(1.0));
}

TEST_CASE("uniform stretch gives the hand-computed Green-Lagrange strain") {
  const Mesh mesh = make_box_3d(1.0, 1.0, 1.0, 2, 2, 2);
  NodalField u(mesh);
  for (int n = 0; n < mesh.num_nodes(); ++n) u.set(n, Vec3(mesh.node(n).x(), 0.0, 0.0));
  const auto s = deformation_gradient(mesh, u, 3, Vec3(0.1, 0.5, -0.4));
  Mat3 expected = Mat3::Zero();
  expected(0, 0) = 1.5;
  CHECK((s.Egl - expected).norm() < 1e-14);
  CHECK(s.Jdet == doctest::Approx(2.0));
}

TEST_CASE("deformation gradient matches finite differences of the interpolated map") {
  auto rng = testing::make_rng(11);
  Mesh mesh = make_box_3d(1.0, 0.6, 0.4, 2, 1, 1);
  NodalField u(mesh);
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    const Vec3 x = mesh.node(n);
    u.set(n, Vec3(0.1 * std::sin(x.y() + 2 * x.z()), 0.05 * x.x() * x.x(), 0.08 * std::cos(x.x())));
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    // Oracle: phi(xi) = sum N_a (X_a + u_a); F = dphi/dxi (dX/dxi)^-1, both by central differences.
    auto interp = [&](const Vec3& xi, bool deformed) {
      const VecX n = shape_values(mesh.kind(), xi);
      Vec3 p = Vec3::Zero();
      for (int a = 0; a < 8; ++a) {
        const int id = mesh.element(e)[a];
        p += n[a] * (mesh.node(id) + (deformed ? u.at(id) : Vec3::Zero()));
      }
      return p;
    };
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 xi = testing::random_vec3(rng, -0.9, 0.9);
      const double h = 1e-5;
      Mat3 dphi, dX;
      for (int j = 0; j < 3; ++j) {
        Vec3 xp = xi, xm = xi;
        xp[j] += h;
        xm[j] -= h;
        dphi.col(j) = (interp(xp, true) - interp(xm, true)) / (2 * h);
        dX.col(j) = (interp(xp, false) - interp(xm, false)) / (2 * h);
      }
      const Mat3 f_fd = dphi * dX.inverse();
      const auto s = deformation_gradient(mesh, u, e, xi);
      CHECK(testing::rel_error(s.F, f_fd) < 1e-6);
    }
  }
}

TEST_CASE("deformation gradient rejects out-of-element coordinates and inverted geometry") {
  Mesh mesh = make_box_3d(1, 1, 1, 1, 1, 1);
  NodalField u(mesh);
  CHECK_THROWS_AS(deformation_gradient(mesh, u, 0, Vec3(1.5, 0, 0)), ArgumentError);

  std::vector<Vec3> nodes = mesh.nodes();
  for (auto& p : nodes) p.x() = -p.x();  // mirrored element: negative Jacobian
  Mesh bad(ElementKind::Hex8, nodes, mesh.elements());
  CHECK_THROWS_AS(deformation_gradient(bad, u, 0, Vec3::Zero()), GeometryError);
  CHECK_THROWS_AS(bad.validate(), GeometryError);
}

TEST_CASE("green_lagrange closed forms") {
  CHECK(green_lagrange(Mat3::Identity()).norm() == 0.0);

  Mat3 shear = Mat3::Identity();
  shear(0, 1) = 0.3;
  const Mat3 e = green_lagrange(shear);
  CHECK(e(0, 1) == doctest::Approx(0.15));
  CHECK(e(1, 0) == doctest::Approx(0.15));
  CHECK(e(1, 1) == doctest::Approx(0.045));
  CHECK(std::abs(e(0, 0)) + std::abs(e(2, 2)) + std::abs(e(0, 2)) + std::abs(e(1, 2)) < 1e-15);

  auto rng = testing::make_rng(3);
  for (int i = 0; i < 20; ++i) CHECK(green_lagrange(testing::random_rotation(rng)).norm() < 1e-14);
}

TEST_CASE("green_lagrange is objective under proper rotations") {
  auto rng = testing::make_rng(5);
  for (int i = 0; i < 100; ++i) {
    const Mat3 F = Mat3::Identity() + 0.4 * Mat3::Random();
    const Mat3 R = testing::random_rotation(rng);
    CHECK((green_lagrange(R * F) - green_lagrange(F)).norm() < 1e-14);
  }
}

TEST_CASE("derived accessors: invariant and principal stretches") {
  Mat3 F = Mat3::Identity();
  F(0, 0) = 2.0;
  F(2, 2) = 0.5;
  const auto s = DeformationState::from_gradient(F);
  CHECK(s.I1() == doctest::Approx(4.0 + 1.0 + 0.25));
  const Vec3 l = s.principal_stretches();
  CHECK(l[0] == doctest::Approx(0.5));
  CHECK(l[2] == doctest::Approx(2.0));
}
