#include "morph/fem/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace morph::fem {

namespace {

using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

struct StepFailure {
  bool inadmissible;
  double last_residual;
  std::string message;
};

VecX prescribed_vector(const Mesh& mesh, const Loads& loads) {
  VecX ud = VecX::Zero(mesh.num_dofs());
  const auto& values = loads.prescribed ? *loads.prescribed : mesh.dirichlet;
  for (const auto& [node, value] : values) {
    if (!mesh.dirichlet.count(node)) {
      throw ArgumentError("prescribed value on unconstrained node " + std::to_string(node));
    }
    for (int c = 0; c < mesh.dim(); ++c) ud[node * mesh.dim() + c] = value[c];
  }
  return ud * loads.scale;
}

void factorize(Factor& solver, const SparseMatrix& k) {
  solver.compute(k);
  if (solver.info() != Eigen::Success) throw ConvergenceError("tangent factorization failed", NAN);
}

}  // namespace

NodalField solve_static(const Mesh& mesh, const MaterialLaw& law, const Loads& loads,
                        const SolverOptions& options, SolveReport* report) {
  law.validate();
  if (mesh.dirichlet.empty()) throw ArgumentError("no Dirichlet boundary: rigid modes not removed");
  const DofPartition dofs(mesh);
  const VecX target_full = prescribed_vector(mesh, loads);

  NodalField u(mesh);
  const int steps = law.kind == LawKind::Linear ? 1 : std::max(1, options.load_steps);
  double t = 0.0;
  double dt = 1.0 / steps;
  int halvings = 0;
  SolveReport rep;

  // One load increment from the current state to factor t_new.
  auto increment = [&](double t_new, std::vector<double>& history) {
    Loads lt = loads;
    lt.scale = loads.scale * t_new;
    const VecX du_full = target_full * t_new - u.values;
    VecX du_d = dofs.restrict_fixed(du_full);
    Factor solver;
    for (int k = 0; k <= options.max_iterations; ++k) {
      AssemblyResult asmr = assemble(mesh, law, u, lt);
      const VecX r_f = dofs.restrict_free(asmr.residual.values);
      const SparseMatrix k_ff = dofs.block(asmr.tangent, true, true);
      if (k == 0 && du_d.squaredNorm() > 0.0) {
        // Predictor carrying the prescribed-displacement increment.
        const SparseMatrix k_fd = dofs.block(asmr.tangent, true, false);
        factorize(solver, k_ff);
        const VecX delta = solver.solve(-(r_f + k_fd * du_d));
        for (size_t i = 0; i < dofs.free.size(); ++i) u.values[dofs.free[i]] += delta[i];
        for (size_t i = 0; i < dofs.fixed.size(); ++i) u.values[dofs.fixed[i]] += du_d[i];
        du_d.setZero();
        continue;
      }
      const VecX fext = dofs.restrict_free(external_forces(mesh, lt));
      const VecX reactions = dofs.restrict_fixed(asmr.residual.values);
      const double ref = std::max(fext.norm(), reactions.norm());
      const double norm = r_f.norm();
      history.push_back(norm);
      if (!std::isfinite(norm)) throw StepFailure{false, norm, "non-finite residual"};
      if (norm <= std::max(options.rel_tol * ref, options.abs_floor)) {
        rep.total_iterations += k;
        return;
      }
      if (k == options.max_iterations) break;
      factorize(solver, k_ff);
      const VecX delta = solver.solve(-r_f);
      for (size_t i = 0; i < dofs.free.size(); ++i) u.values[dofs.free[i]] += delta[i];
    }
    throw StepFailure{false, history.empty() ? NAN : history.back(),
                      "Newton did not converge in " + std::to_string(options.max_iterations) +
                          " iterations"};
  };

  while (t < 1.0 - 1e-14) {
    const double t_new = std::min(1.0, t + dt);
    const VecX saved = u.values;
    std::vector<double> history;
    try {
      increment(t_new, history);
      t = t_new;
      ++rep.load_steps_taken;
      rep.last_step_residuals = history;
    } catch (const InadmissibleStateError& err) {
      u.values = saved;
      if (halvings >= options.max_halvings) {
        throw InadmissibleStateError(std::string(err.what()) + " (step halving exhausted)",
                                     err.element());
      }
      ++halvings;
      dt *= 0.5;
    } catch (const StepFailure& fail) {
      u.values = saved;
      if (halvings >= options.max_halvings) {
        throw ConvergenceError(fail.message + " at load factor " + std::to_string(t_new),
                               fail.last_residual);
      }
      ++halvings;
      dt *= 0.5;
    }
  }
  rep.halvings = halvings;
  if (report) *report = rep;
  return u;
}

MatX solve_linear_multi(const Mesh& mesh, const MaterialLaw& law, const MatX& forces) {
  if (law.kind != LawKind::Linear) throw ArgumentError("solve_linear_multi requires the linear law");
  if (forces.rows() != mesh.num_dofs()) throw ArgumentError("force matrix size mismatch");
  const DofPartition dofs(mesh);
  Loads none;
  none.use_mesh_tractions = false;
  const AssemblyResult asmr = assemble(mesh, law, NodalField(mesh), none);
  Factor solver;
  factorize(solver, dofs.block(asmr.tangent, true, true));
  MatX out = MatX::Zero(mesh.num_dofs(), forces.cols());
  for (int c = 0; c < forces.cols(); ++c) {
    const VecX x = solver.solve(dofs.restrict_free(forces.col(c)));
    for (size_t i = 0; i < dofs.free.size(); ++i) out(dofs.free[i], c) = x[i];
  }
  return out;
}

}  // namespace morph::fem
