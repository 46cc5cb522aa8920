#pragma once

#include "morph/fem/solver.hpp"
#include "morph/mor/parameter_space.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace morph::mor {

struct Snapshot {
  VecX mu;
  fem::NodalField u;
};

struct SnapshotSet {
  fem::Mesh mesh;
  fem::MaterialLaw law;
  std::vector<Snapshot> samples;

  int size() const { return static_cast<int>(samples.size()); }
  /// num_dofs x size, one snapshot per column.
  MatX matrix() const;
};

/// Boundary-condition family: loads (and prescribed displacements) at mu.
using LoadFamily = std::function<fem::Loads(const VecX& mu)>;

struct SamplingPlan {
  enum class Kind { FullGrid, RandomSubset, Explicit };
  Kind kind = Kind::FullGrid;
  int count = 0;           // RandomSubset: number of distinct grid points
  std::uint64_t seed = 0;  // RandomSubset
  std::vector<VecX> points;  // Explicit

  /// Sample locations, in a deterministic order.
  std::vector<VecX> resolve(const ParameterSpace& space) const;
};

/// One or more samples failed to solve.
class SnapshotError : public Error {
 public:
  SnapshotError(const std::string& what, std::vector<VecX> failed)
      : Error(what), failed_(std::move(failed)) {}
  const std::vector<VecX>& failed() const { return failed_; }

 private:
  std::vector<VecX> failed_;
};

/// Solves the static problem at every sample, in parallel over samples.
/// Results are stored by sample index, so output order and values do not
/// depend on the thread count.
SnapshotSet generate_snapshots(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                               const LoadFamily& family, const ParameterSpace& space,
                               const SamplingPlan& plan, const fem::SolverOptions& options = {});

/// Single-threaded reference path.
SnapshotSet generate_snapshots_serial(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                                      const LoadFamily& family, const ParameterSpace& space,
                                      const SamplingPlan& plan,
                                      const fem::SolverOptions& options = {});

}  // namespace morph::mor
