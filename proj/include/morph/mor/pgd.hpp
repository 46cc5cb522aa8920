#pragma once

#include "morph/fem/material.hpp"
#include "morph/fem/mesh.hpp"
#include "morph/mor/load_separation.hpp"
#include "morph/mor/separated_solution.hpp"

#include <string>
#include <vector>

namespace morph::mor {

/// Fixed-point alternation did not settle within the sweep budget.
class EnrichmentError : public Error {
 public:
  EnrichmentError(const std::string& what, int mode, double sweep_change)
      : Error(what), mode_(mode), sweep_change_(sweep_change) {}
  int mode() const { return mode_; }
  double sweep_change() const { return sweep_change_; }

 private:
  int mode_;
  double sweep_change_;
};

struct PgdOptions {
  double fixed_point_tol = 1e-4;  // relative change of the rank-1 update
  int max_sweeps = 25;
  double enrich_tol = 1e-4;  // new-mode amplitude relative to the first
  int max_rank = 50;
  /// A mode still moving after max_sweeps is accepted with a warning unless
  /// this is set, in which case EnrichmentError is thrown.
  bool fail_on_stall = false;
};

struct PgdReport {
  std::vector<int> sweeps;          // per accepted mode
  std::vector<double> amplitudes;   // |R| * |S| per accepted mode
  std::vector<std::string> warnings;
  bool reached_rank_cap = false;
};

/// Parametric linear-elastic solution U(X, s) for a load separated over one
/// parameter. Homogeneous Dirichlet data from the mesh. Greedy rank-1
/// enrichment; each pair (R, S) from alternating Galerkin steps with 1D
/// piecewise-linear test functions in s.
SeparatedSolution pgd_build(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                            const SeparatedLoad& load, const ParameterSpace& pspace,
                            const PgdOptions& options = {}, PgdReport* report = nullptr);

/// Consistent 1D mass matrix of the piecewise-linear grid functions.
MatX grid_mass_matrix(const Parameter& p);

}  // namespace morph::mor
