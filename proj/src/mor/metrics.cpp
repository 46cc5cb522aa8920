#include "morph/mor/metrics.hpp"

namespace morph::mor {

double compression_factor(double m_p, double m_o) {
  if (!(m_o > 0.0)) throw ArgumentError("reference storage must be positive");
  if (m_p < 0.0) throw ArgumentError("storage counts cannot be negative");
  return (1.0 - m_p / m_o) * 100.0;
}

double compression_factor(const SeparatedSolution& sol, const SnapshotSet& reference) {
  return compression_factor(static_cast<double>(sol.storage_scalars()),
                            static_cast<double>(reference.mesh.num_dofs()) * reference.size());
}

double compression_factor(const SeparatedSolution& sol) {
  return compression_factor(static_cast<double>(sol.storage_scalars()),
                            static_cast<double>(sol.num_space_dofs()) * sol.parameter_space.full_grid_count());
}

DisplacementError displacement_error(const SeparatedSolution& sol, const SnapshotSet& oracle) {
  if (oracle.size() == 0) throw ArgumentError("oracle snapshot set is empty");
  if (oracle.mesh.num_dofs() != sol.num_space_dofs()) throw ArgumentError("oracle mesh does not match");
  const int dim = sol.dim;
  DisplacementError err;
  double sum = 0.0, umax = 0.0;
  long long count = 0;
  for (const auto& s : oracle.samples) {
    const VecX diff = sol.evaluate_nodal(s.mu) - s.u.values;
    for (int n = 0; n < sol.num_nodes; ++n) {
      const double e = diff.segment(n * dim, dim).norm();
      sum += e;
      err.max = std::max(err.max, e);
      umax = std::max(umax, s.u.values.segment(n * dim, dim).norm());
      ++count;
    }
  }
  err.mean = sum / static_cast<double>(count);
  err.normalized = umax > 0.0 ? err.mean / umax : 0.0;
  return err;
}

std::vector<ModeErrorPoint> mode_error_curve(const SeparatedSolution& sol, const SnapshotSet& oracle,
                                             int max_rank) {
  std::vector<ModeErrorPoint> out;
  for (int r = 1; r <= std::min(max_rank, sol.rank()); ++r) {
    out.push_back({r, displacement_error(sol.truncated(r), oracle)});
  }
  return out;
}

std::vector<ModeErrorPoint> mode_error_curve(const std::function<SeparatedSolution(int)>& build,
                                             const SnapshotSet& oracle, int max_rank) {
  std::vector<ModeErrorPoint> out;
  for (int r = 1; r <= max_rank; ++r) out.push_back({r, displacement_error(build(r), oracle)});
  return out;
}

}  // namespace morph::mor
