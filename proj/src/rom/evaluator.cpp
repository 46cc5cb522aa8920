#include "morph/rom/evaluator.hpp"

#include "morph/fem/shape.hpp"

namespace morph::rom {

namespace {

std::vector<Vec3> unstack(const VecX& v) {
  std::vector<Vec3> out(v.size() / 3);
  for (size_t p = 0; p < out.size(); ++p) out[p] = v.segment<3>(3 * p);
  return out;
}

}  // namespace

ReducedEvaluator::ReducedEvaluator(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                                   const std::vector<PointBinding>& points)
    : sol_(sol) {
  sol.validate();
  if (mesh.num_nodes() != sol.num_nodes || mesh.dim() != sol.dim) {
    throw ArgumentError("mesh does not match the separated solution");
  }
  const int r = sol.rank(), dim = sol.dim;
  modes_.setZero(3 * static_cast<int>(points.size()), r);
  for (size_t p = 0; p < points.size(); ++p) {
    const PointBinding& b = points[p];
    if (b.status == BindingStatus::Rejected) {
      throw BindingError("point " + std::to_string(p) + " is outside the mesh (distance " +
                         std::to_string(b.distance) + ")");
    }
    if (b.status == BindingStatus::NodeFallback) {
      for (int c = 0; c < dim; ++c) modes_.row(3 * p + c) = sol.space_modes.row(b.node * dim + c);
      continue;
    }
    const VecX n = fem::shape_values(mesh.kind(), b.xi);
    const auto& conn = mesh.element(b.element);
    for (int a = 0; a < n.size(); ++a)
      for (int c = 0; c < dim; ++c) modes_.row(3 * p + c) += n[a] * sol.space_modes.row(conn[a] * dim + c);
  }
  // Only the parameter modes are needed from here on.
  sol_.space_modes.resize(0, r);
}

ReducedEvaluator::ReducedEvaluator(const mor::SeparatedSolution& sol, const std::vector<int>& nodes)
    : sol_(sol) {
  sol.validate();
  const int r = sol.rank(), dim = sol.dim;
  modes_.setZero(3 * static_cast<int>(nodes.size()), r);
  for (size_t p = 0; p < nodes.size(); ++p) {
    if (nodes[p] < 0 || nodes[p] >= sol.num_nodes) throw ArgumentError("node id out of range");
    for (int c = 0; c < dim; ++c) modes_.row(3 * p + c) = sol.space_modes.row(nodes[p] * dim + c);
  }
  sol_.space_modes.resize(0, r);
}

void ReducedEvaluator::apply(const MatX& weights, MatX& out, bool parallel) const {
  const int rows = static_cast<int>(modes_.rows()), r = rank(), m = static_cast<int>(weights.cols());
  out.setZero(rows, m);
  // Fixed summation order per row, so every thread count gives the same bits.
  auto row = [&](int i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int t = 0; t < r; ++t) s += modes_(i, t) * weights(t, j);
      out(i, j) = s;
    }
  };
  if (parallel && rows >= 768) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) row(i);
  } else {
    for (int i = 0; i < rows; ++i) row(i);
  }
}

VecX ReducedEvaluator::displacement(const VecX& mu, bool* clamped) const {
  MatX out;
  apply(sol_.term_weights(mu, clamped), out, true);
  return out.col(0);
}

VecX ReducedEvaluator::displacement_serial(const VecX& mu) const {
  MatX out;
  apply(sol_.term_weights(mu), out, false);
  return out.col(0);
}

VecX ReducedEvaluator::sensitivity(const VecX& mu, int k) const {
  if (k < 0 || k >= num_params()) throw ArgumentError("parameter index out of range");
  MatX out;
  apply(sol_.term_weight_derivatives(mu, k), out, true);
  return out.col(0);
}

MatX ReducedEvaluator::sensitivities(const VecX& mu) const {
  MatX w(rank(), num_params());
  for (int k = 0; k < num_params(); ++k) w.col(k) = sol_.term_weight_derivatives(mu, k);
  MatX out;
  apply(w, out, true);
  return out;
}

MatX ReducedEvaluator::sensitivities_serial(const VecX& mu) const {
  MatX w(rank(), num_params());
  for (int k = 0; k < num_params(); ++k) w.col(k) = sol_.term_weight_derivatives(mu, k);
  MatX out;
  apply(w, out, false);
  return out;
}

std::vector<Vec3> evaluate_displacement(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                                        const std::vector<PointBinding>& points, const VecX& mu,
                                        bool* clamped) {
  return unstack(ReducedEvaluator(sol, mesh, points).displacement(mu, clamped));
}

std::vector<Vec3> evaluate_displacement(const mor::SeparatedSolution& sol, const std::vector<int>& nodes,
                                        const VecX& mu, bool* clamped) {
  return unstack(ReducedEvaluator(sol, nodes).displacement(mu, clamped));
}

std::vector<Vec3> evaluate_sensitivity(const mor::SeparatedSolution& sol, const fem::Mesh& mesh,
                                       const std::vector<PointBinding>& points, const VecX& mu, int k) {
  return unstack(ReducedEvaluator(sol, mesh, points).sensitivity(mu, k));
}

std::vector<Vec3> evaluate_sensitivity(const mor::SeparatedSolution& sol, const std::vector<int>& nodes,
                                       const VecX& mu, int k) {
  return unstack(ReducedEvaluator(sol, nodes).sensitivity(mu, k));
}

}  // namespace morph::rom
