#include "morph/mor/fit.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace morph::mor {

VecX hat_weights(const ParameterSpace& space, int k, double value) {
  const GridLocation loc = space.locate(k, value);
  VecX w = VecX::Zero(space[k].grid_size());
  w[loc.segment] = 1.0 - loc.weight;
  w[loc.segment + 1] += loc.weight;
  return w;
}

namespace {

MatX second_difference(int n) {
  MatX d = MatX::Zero(std::max(n - 2, 0), n);
  for (int i = 0; i + 2 < n; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d;
}

double outer_diff_norm(const VecX& a, const VecX& b, const VecX& c, const VecX& d) {
  const double v = a.squaredNorm() * b.squaredNorm() + c.squaredNorm() * d.squaredNorm() -
                   2.0 * a.dot(c) * b.dot(d);
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace

SeparatedSolution fit_separated(const SnapshotSet& snapshots, const ParameterSpace& space, int rank,
                                const FitOptions& options, FitReport* report) {
  if (rank < 1) throw ArgumentError("fit rank must be at least 1");
  if (rank > snapshots.size()) {
    throw ArgumentError("fit rank " + std::to_string(rank) + " exceeds the snapshot count " +
                        std::to_string(snapshots.size()));
  }
  const int np = space.size();
  const int ns = snapshots.size();
  for (const auto& s : snapshots.samples) {
    if (!space.contains(s.mu, 1e-9)) throw ArgumentError("snapshot parameter outside the box");
  }
  FitReport local;
  FitReport& rep = report ? *report : local;
  rep = FitReport{};

  // Hat matrices: phi[k] is ns x grid_k.
  std::vector<MatX> phi(np), dtd(np);
  for (int k = 0; k < np; ++k) {
    phi[k] = MatX::Zero(ns, space[k].grid_size());
    for (int s = 0; s < ns; ++s) phi[k].row(s) = hat_weights(space, k, snapshots.samples[s].mu[k]).transpose();
    const MatX d = second_difference(space[k].grid_size());
    dtd[k] = d.transpose() * d;
  }

  const MatX data = snapshots.matrix();
  MatX resid = data;
  const double data_norm = data.norm();
  SeparatedSolution sol = SeparatedSolution::zero(snapshots.mesh.num_nodes(), snapshots.mesh.dim(), space);
  sol.method = BuildMethod::SparsePgd;
  sol.law = snapshots.law;
  bool warned_support = false;

  for (int term = 0; term < rank; ++term) {
    if (resid.norm() <= 1e-13 * data_norm) break;
    Eigen::Index best;
    resid.colwise().squaredNorm().maxCoeff(&best);
    VecX a = resid.col(best);
    std::vector<VecX> beta(np);
    for (int k = 0; k < np; ++k) beta[k] = VecX::Ones(space[k].grid_size());

    auto sample_weights = [&](int skip) {
      VecX w = VecX::Ones(ns);
      for (int k = 0; k < np; ++k)
        if (k != skip) w = w.cwiseProduct(phi[k] * beta[k]);
      return w;
    };

    VecX a_old = VecX::Zero(a.size()), w_old = VecX::Zero(ns);
    int it = 0;
    for (; it < options.max_iterations; ++it) {
      const VecX g = resid.transpose() * a;  // a . R_s per sample
      const double aa = a.squaredNorm();
      for (int k = 0; k < np; ++k) {
        const VecX c = sample_weights(k);
        MatX lhs = aa * phi[k].transpose() * c.cwiseAbs2().asDiagonal() * phi[k];
        const VecX rhs = phi[k].transpose() * c.cwiseProduct(g);
        const double tau = lhs.trace() / lhs.rows();
        if (!(tau > 0.0)) break;
        if (lhs.diagonal().minCoeff() <= 1e-10 * tau) {
          if (!warned_support) {
            warned_support = true;
            const std::string msg = "parameter '" + space[k].name +
                                    "' has grid nodes without sample support; regularized solve";
            spdlog::warn(msg);
            rep.warnings.push_back(msg);
          }
          lhs += tau * (options.smoothing * dtd[k] + options.ridge * MatX::Identity(lhs.rows(), lhs.cols()));
        }
        beta[k] = lhs.ldlt().solve(rhs);
        const double n = beta[k].norm();
        if (n > 0.0) {
          beta[k] /= n;
          a *= n;
        }
      }
      // a-step last: optimal for the current parameter factors, so the
      // residual cannot grow past its value without this term.
      const VecX w = sample_weights(-1);
      const double ww = w.squaredNorm();
      if (!(ww > 0.0)) break;
      a = resid * w / ww;
      const double scale = a.norm() * w.norm();
      const double change = scale > 0.0 ? outer_diff_norm(a, w, a_old, w_old) / scale : 0.0;
      a_old = a;
      w_old = w;
      if (it > 0 && change < options.tol) break;
    }
    const VecX w = sample_weights(-1);
    resid -= a * w.transpose();
    rep.training_residual.push_back(resid.norm());
    rep.iterations.push_back(std::min(it + 1, options.max_iterations));
    std::vector<VecX> params(beta.begin(), beta.end());
    sol.append_term(a, params);
  }
  sol.normalize();
  return sol;
}

}  // namespace morph::mor
