#pragma once

#include "morph/mor/separated_solution.hpp"
#include "morph/mor/snapshots.hpp"

#include <functional>
#include <vector>

namespace morph::mor {

/// C = (1 - m_p / m_o) * 100, both counts in stored scalars.
double compression_factor(double m_p, double m_o);
/// Reference: the snapshot set stored in full.
double compression_factor(const SeparatedSolution& sol, const SnapshotSet& reference);
/// Reference: the full-grid solution tensor (space dofs x every grid node).
double compression_factor(const SeparatedSolution& sol);

struct DisplacementError {
  double mean = 0.0;        // mean Euclidean nodal error over samples and nodes
  double normalized = 0.0;  // mean / max displacement magnitude in the oracle
  double max = 0.0;
};

DisplacementError displacement_error(const SeparatedSolution& sol, const SnapshotSet& oracle);

struct ModeErrorPoint {
  int rank;
  DisplacementError error;
};

/// Error of the rank-r truncations of sol, r = 1..min(max_rank, rank).
std::vector<ModeErrorPoint> mode_error_curve(const SeparatedSolution& sol, const SnapshotSet& oracle,
                                             int max_rank);

/// Same, rebuilding the solution for each rank.
std::vector<ModeErrorPoint> mode_error_curve(const std::function<SeparatedSolution(int)>& build,
                                             const SnapshotSet& oracle, int max_rank);

}  // namespace morph::mor
