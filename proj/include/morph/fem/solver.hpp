#pragma once

#include "morph/fem/assembly.hpp"

#include <vector>

namespace morph::fem {

struct SolverOptions {
  double rel_tol = 1e-8;
  double abs_floor = 1e-10;
  int max_iterations = 25;
  int load_steps = 10;  // used for the Neo-Hookean law; the linear law is solved in one step
  int max_halvings = 5;
};

struct SolveReport {
  int load_steps_taken = 0;
  int halvings = 0;
  int total_iterations = 0;
  /// Free-dof residual norms of the Newton iterations of the final load step.
  std::vector<double> last_step_residuals;
};

/// Static equilibrium under `loads`. Dirichlet values are ramped with the
/// load factor. Convergence: |r_free| <= rel_tol * max(|f_ext|, |reactions|)
/// or |r_free| <= abs_floor.
NodalField solve_static(const Mesh& mesh, const MaterialLaw& law, const Loads& loads,
                        const SolverOptions& options = {}, SolveReport* report = nullptr);

/// Linear-law solve reusing one factorization for many right-hand sides:
/// one column of `forces` per load case (full dof vectors), homogeneous
/// Dirichlet data. Returns full displacement vectors column-wise.
MatX solve_linear_multi(const Mesh& mesh, const MaterialLaw& law, const MatX& forces);

}  // namespace morph::fem
