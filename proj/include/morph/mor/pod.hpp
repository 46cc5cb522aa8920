#pragma once

#include "morph/mor/separated_solution.hpp"
#include "morph/mor/snapshots.hpp"

namespace morph::mor {

struct PodOptions {
  double energy_fraction = 0.9999;  // ignored when rank > 0
  int rank = 0;
};

struct PodResult {
  SeparatedSolution solution;
  VecX singular_values;  // all of them, descending
};

/// POD of the snapshot matrix. Space modes are the leading left singular
/// vectors; each mode's coefficients over the samples are interpolated
/// (piecewise linear, sorted by the parameter) onto the parameter grid.
/// Single-parameter spaces only. Singular values below 1e-12 of the largest
/// are treated as zero.
PodResult pod_basis(const SnapshotSet& snapshots, const ParameterSpace& space,
                    const PodOptions& options = {});

}  // namespace morph::mor
