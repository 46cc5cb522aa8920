#pragma once

#include "morph/core.hpp"
#include "morph/fem/mesh.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace morph::fem {

// Natural corner coordinates, shared by quad4 (first four, zeta ignored) and hex8.
inline constexpr std::array<std::array<double, 3>, 8> kCorners = {{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

/// Shape function values (npe) at natural coordinates xi.
inline VecX shape_values(ElementKind kind, const Vec3& xi) {
  const int npe = nodes_per_element(kind);
  VecX n(npe);
  for (int a = 0; a < npe; ++a) {
    const auto& c = kCorners[a];
    double v = (1 + c[0] * xi[0]) * (1 + c[1] * xi[1]);
    v *= kind == ElementKind::Hex8 ? 0.125 * (1 + c[2] * xi[2]) : 0.25;
    n[a] = v;
  }
  return n;
}

/// Natural derivatives, dim x npe.
inline MatX shape_gradients(ElementKind kind, const Vec3& xi) {
  const int npe = nodes_per_element(kind);
  const int dim = spatial_dim(kind);
  MatX g(dim, npe);
  for (int a = 0; a < npe; ++a) {
    const auto& c = kCorners[a];
    if (kind == ElementKind::Quad4) {
      g(0, a) = 0.25 * c[0] * (1 + c[1] * xi[1]);
      g(1, a) = 0.25 * c[1] * (1 + c[0] * xi[0]);
    } else {
      g(0, a) = 0.125 * c[0] * (1 + c[1] * xi[1]) * (1 + c[2] * xi[2]);
      g(1, a) = 0.125 * c[1] * (1 + c[0] * xi[0]) * (1 + c[2] * xi[2]);
      g(2, a) = 0.125 * c[2] * (1 + c[0] * xi[0]) * (1 + c[1] * xi[1]);
    }
  }
  return g;
}

struct QuadraturePoint {
  Vec3 xi;
  double weight;
};

/// Full 2-point Gauss rule per direction.
inline std::vector<QuadraturePoint> gauss_points(ElementKind kind) {
  const double g = 1.0 / std::sqrt(3.0);
  std::vector<QuadraturePoint> qp;
  if (kind == ElementKind::Quad4) {
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) qp.push_back({Vec3((i ? g : -g), (j ? g : -g), 0.0), 1.0});
  } else {
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
          qp.push_back({Vec3((i ? g : -g), (j ? g : -g), (k ? g : -g)), 1.0});
  }
  return qp;
}

/// Reference-configuration geometry at one natural point.
struct PointGeometry {
  VecX n;        // shape values
  MatX dn_dx;    // dim x npe, derivatives w.r.t. reference coordinates
  double det_j;  // det of d X / d xi
};

/// Evaluates shape functions and reference gradients at xi for an element
/// whose reference coordinates are `coords` (dim x npe). Throws GeometryError
/// when the mapping is not orientation preserving.
inline PointGeometry point_geometry(ElementKind kind, const MatX& coords, const Vec3& xi,
                                    int element_id = -1) {
  PointGeometry pg;
  pg.n = shape_values(kind, xi);
  const MatX dn_dxi = shape_gradients(kind, xi);
  const MatX jac = coords * dn_dxi.transpose();  // dim x dim, dX_i / dxi_j
  pg.det_j = jac.determinant();
  if (!(pg.det_j > 0.0)) {
    throw GeometryError("non-positive reference Jacobian in element " +
                        std::to_string(element_id));
  }
  pg.dn_dx = jac.transpose().inverse() * dn_dxi;
  return pg;
}

}  // namespace morph::fem
