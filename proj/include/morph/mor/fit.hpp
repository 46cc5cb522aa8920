#pragma once

#include "morph/mor/separated_solution.hpp"
#include "morph/mor/snapshots.hpp"

#include <string>
#include <vector>

namespace morph::mor {

struct FitOptions {
  /// Applied only when a parameter-mode step is ill-conditioned (grid nodes
  /// without sample support): weight of the squared second differences and
  /// a ridge, both relative to the data term's mean diagonal.
  double smoothing = 1e-4;
  double ridge = 1e-10;
  int max_iterations = 60;
  double tol = 1e-7;  // relative change of the rank-1 term
};

struct FitReport {
  std::vector<double> training_residual;  // Frobenius residual after each term
  std::vector<int> iterations;
  std::vector<std::string> warnings;
};

/// Separated regression of snapshots onto sum_i a_i(X) prod_k b_ik(mu_k),
/// with b_ik piecewise linear on the parameter grids. Greedy rank-1
/// enrichment, each term from alternating least squares on the residual.
SeparatedSolution fit_separated(const SnapshotSet& snapshots, const ParameterSpace& space, int rank,
                                const FitOptions& options = {}, FitReport* report = nullptr);

/// Hat-function values of parameter k at mu_k (grid-size vector, at most two
/// nonzeros).
VecX hat_weights(const ParameterSpace& space, int k, double value);

}  // namespace morph::mor
