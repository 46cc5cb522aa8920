#include "morph/mor/load_separation.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace morph::mor {

LoadMatrix moving_point_load(const std::vector<int>& nodes, const std::vector<double>& positions,
                             const std::vector<double>& s_grid, double force, const Vec3& direction,
                             double width) {
  if (nodes.size() != positions.size()) throw ArgumentError("one position per boundary node expected");
  LoadMatrix m;
  m.nodes = nodes;
  m.direction = direction.normalized();
  m.values = MatX::Zero(static_cast<int>(nodes.size()), static_cast<int>(s_grid.size()));
  for (size_t j = 0; j < s_grid.size(); ++j) {
    if (width == 0.0) {
      bool hit = false;
      for (size_t i = 0; i < nodes.size(); ++i) {
        if (std::abs(positions[i] - s_grid[j]) <= 1e-12 * (1.0 + std::abs(s_grid[j]))) {
          m.values(static_cast<int>(i), static_cast<int>(j)) = force;
          hit = true;
        }
      }
      if (!hit) throw ArgumentError("delta load requires s-grid nodes to coincide with boundary nodes");
    } else {
      for (size_t i = 0; i < nodes.size(); ++i) {
        const double d = (positions[i] - s_grid[j]) / width;
        m.values(static_cast<int>(i), static_cast<int>(j)) = force * std::exp(-0.5 * d * d);
      }
    }
  }
  return m;
}

VecX SeparatedLoad::space_term(int j, int num_nodes, int dim) const {
  VecX f = VecX::Zero(num_nodes * dim);
  for (size_t i = 0; i < nodes.size(); ++i)
    for (int c = 0; c < dim; ++c) f[nodes[i] * dim + c] += h(static_cast<int>(i), j) * direction[c];
  return f;
}

VecX SeparatedLoad::assemble_at(int s_index, int num_nodes, int dim) const {
  VecX f = VecX::Zero(num_nodes * dim);
  for (int j = 0; j < terms(); ++j) f += k(s_index, j) * space_term(j, num_nodes, dim);
  return f;
}

double SeparatedLoad::reconstruction_error(const LoadMatrix& load) const {
  const MatX approx = terms() == 0 ? MatX::Zero(load.values.rows(), load.values.cols()) : MatX(h * k.transpose());
  const double ref = load.values.norm();
  return ref == 0.0 ? approx.norm() : (approx - load.values).norm() / ref;
}

namespace {

// Each column has at most one nonzero and each row at most one.
bool is_scaled_pairing(const MatX& v) {
  for (int j = 0; j < v.cols(); ++j)
    if ((v.col(j).array() != 0.0).count() > 1) return false;
  for (int i = 0; i < v.rows(); ++i)
    if ((v.row(i).array() != 0.0).count() > 1) return false;
  return true;
}

}  // namespace

SeparatedLoad separate_load(const LoadMatrix& load, int m_terms, double tol) {
  if (m_terms < 0) throw ArgumentError("m_terms must be non-negative");
  SeparatedLoad out;
  out.nodes = load.nodes;
  out.direction = load.direction;
  const MatX& v = load.values;
  const int nb = static_cast<int>(v.rows()), ns = static_cast<int>(v.cols());

  if (v.isZero(0.0)) {
    out.h = MatX::Zero(nb, 0);
    out.k = MatX::Zero(ns, 0);
    return out;
  }

  if (is_scaled_pairing(v)) {
    // Exact separation: node indicator in space times grid indicator in s.
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < ns; ++j)
      for (int i = 0; i < nb; ++i)
        if (v(i, j) != 0.0) pairs.emplace_back(i, j);
    if (static_cast<int>(pairs.size()) > m_terms) {
      // Fall through to SVD only if it can do better; the pairing is full rank.
      throw ApproximationToleranceError(
          "delta load needs " + std::to_string(pairs.size()) + " terms, " + std::to_string(m_terms) +
              " allowed",
          std::sqrt(1.0 - static_cast<double>(m_terms) / pairs.size()));
    }
    out.h = MatX::Zero(nb, static_cast<int>(pairs.size()));
    out.k = MatX::Zero(ns, static_cast<int>(pairs.size()));
    for (size_t t = 0; t < pairs.size(); ++t) {
      out.h(pairs[t].first, static_cast<int>(t)) = v(pairs[t].first, pairs[t].second);
      out.k(pairs[t].second, static_cast<int>(t)) = 1.0;
    }
    return out;
  }

  Eigen::JacobiSVD<MatX> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  double tail = total;
  int m = 0;
  while (m < sv.size() && std::sqrt(std::max(tail, 0.0) / total) > tol) {
    tail -= sv[m] * sv[m];
    ++m;
  }
  if (m > m_terms) {
    double t = 0.0;
    for (int i = m_terms; i < sv.size(); ++i) t += sv[i] * sv[i];
    throw ApproximationToleranceError(
        "load separation needs " + std::to_string(m) + " terms for tolerance, " +
            std::to_string(m_terms) + " allowed",
        std::sqrt(t / total));
  }
  out.h = svd.matrixU().leftCols(m);
  out.k = svd.matrixV().leftCols(m) * sv.head(m).asDiagonal();
  for (int j = 0; j < m; ++j) {
    // Space factor unit norm with positive dominant sign.
    Eigen::Index imax;
    out.h.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.h(imax, j) < 0) {
      out.h.col(j) *= -1;
      out.k.col(j) *= -1;
    }
  }
  return out;
}

}  // namespace morph::mor
