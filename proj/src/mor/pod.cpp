#include "morph/mor/pod.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace morph::mor {

namespace {

// Piecewise-linear interpolation of (x, y) samples at q, constant beyond the ends.
double interp(const std::vector<double>& x, const std::vector<double>& y, double q) {
  if (q <= x.front()) return y.front();
  if (q >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const size_t i = static_cast<size_t>(it - x.begin()) - 1;
  const double t = (q - x[i]) / (x[i + 1] - x[i]);
  return (1.0 - t) * y[i] + t * y[i + 1];
}

}  // namespace

PodResult pod_basis(const SnapshotSet& snapshots, const ParameterSpace& space, const PodOptions& options) {
  if (snapshots.size() == 0) throw ArgumentError("pod_basis needs at least one snapshot");
  if (space.size() != 1) throw ArgumentError("pod_basis supports a single parameter");

  const MatX data = snapshots.matrix();
  Eigen::BDCSVD<MatX> svd(data, Eigen::ComputeThinU | Eigen::ComputeThinV);
  PodResult out;
  out.singular_values = svd.singularValues();
  const VecX& sv = out.singular_values;

  int numeric_rank = 0;
  while (numeric_rank < sv.size() && sv[numeric_rank] > 1e-12 * sv[0]) ++numeric_rank;
  int r = 0;
  if (options.rank > 0) {
    r = std::min(options.rank, numeric_rank);
  } else {
    if (!(options.energy_fraction > 0.0 && options.energy_fraction <= 1.0)) {
      throw ArgumentError("energy fraction must lie in (0, 1]");
    }
    const double total = sv.head(numeric_rank).squaredNorm();
    double acc = 0.0;
    if (options.energy_fraction == 1.0) r = numeric_rank;
    while (r < numeric_rank && acc < options.energy_fraction * total) {
      acc += sv[r] * sv[r];
      ++r;
    }
  }

  // Samples sorted by parameter; duplicate parameter values are averaged.
  const int ns = snapshots.size();
  std::vector<int> order(ns);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return snapshots.samples[a].mu[0] < snapshots.samples[b].mu[0];
  });
  const MatX coeff = svd.matrixU().leftCols(r).transpose() * data;  // r x ns

  SeparatedSolution sol = SeparatedSolution::zero(snapshots.mesh.num_nodes(), snapshots.mesh.dim(), space);
  sol.method = BuildMethod::Pod;
  sol.law = snapshots.law;
  const Parameter& p = space[0];
  for (int i = 0; i < r; ++i) {
    std::vector<double> xs, ys;
    std::vector<int> counts;
    for (int s : order) {
      const double x = snapshots.samples[s].mu[0];
      if (!xs.empty() && x == xs.back()) {
        ys.back() += coeff(i, s);
        ++counts.back();
      } else {
        xs.push_back(x);
        ys.push_back(coeff(i, s));
        counts.push_back(1);
      }
    }
    for (size_t j = 0; j < ys.size(); ++j) ys[j] /= counts[j];
    VecX g(p.grid_size());
    for (int j = 0; j < p.grid_size(); ++j) g[j] = interp(xs, ys, p.grid[j]);
    sol.append_term(svd.matrixU().col(i), {g});
  }
  sol.normalize();
  out.solution = std::move(sol);
  return out;
}

}  // namespace morph::mor
