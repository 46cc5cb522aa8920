#include "morph/mor/pgd.hpp"

#include "morph/fem/assembly.hpp"

#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

#include <cmath>

namespace morph::mor {

MatX grid_mass_matrix(const Parameter& p) {
  const int n = p.grid_size();
  MatX m = MatX::Zero(n, n);
  for (int e = 0; e + 1 < n; ++e) {
    const double h = p.grid[e + 1] - p.grid[e];
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

namespace {

// |a b^T - c d^T|_F without forming the outer products.
double outer_diff_norm(const VecX& a, const VecX& b, const VecX& c, const VecX& d) {
  const double v = a.squaredNorm() * b.squaredNorm() + c.squaredNorm() * d.squaredNorm() -
                   2.0 * a.dot(c) * b.dot(d);
  return std::sqrt(std::max(v, 0.0));
}

}  // namespace

SeparatedSolution pgd_build(const fem::Mesh& mesh, const fem::MaterialLaw& law,
                            const SeparatedLoad& load, const ParameterSpace& pspace,
                            const PgdOptions& options, PgdReport* report) {
  if (law.kind != fem::LawKind::Linear) throw ArgumentError("pgd_build requires the linear law");
  if (pspace.size() != 1) throw ArgumentError("pgd_build handles a single load parameter");
  const Parameter& s = pspace[0];
  if (load.k.rows() != s.grid_size()) throw ArgumentError("load parameter factors do not match the grid");

  const int dim = mesh.dim();
  SeparatedSolution sol = SeparatedSolution::zero(mesh.num_nodes(), dim, pspace);
  sol.method = BuildMethod::Pgd;
  sol.law = law;
  PgdReport local;
  PgdReport& rep = report ? *report : local;
  rep = PgdReport{};
  if (load.terms() == 0) return sol;

  const fem::DofPartition dofs(mesh);
  fem::Loads none;
  none.use_mesh_tractions = false;
  const fem::SparseMatrix kff =
      dofs.block(fem::assemble(mesh, law, fem::NodalField(mesh), none).tangent, true, true);
  Eigen::SimplicialLDLT<fem::SparseMatrix> chol(kff);
  if (chol.info() != Eigen::Success) throw ArgumentError("stiffness matrix is not positive definite");

  const int nf = static_cast<int>(dofs.free.size());
  MatX fspace(nf, load.terms());
  for (int j = 0; j < load.terms(); ++j) {
    fspace.col(j) = dofs.restrict_free(load.space_term(j, mesh.num_nodes(), dim));
  }
  if (fspace.isZero(0.0) || load.k.isZero(0.0)) return sol;

  const MatX ms = grid_mass_matrix(s);
  const MatX& kmat = load.k;
  MatX umodes(nf, 0);   // accepted space modes, free dofs
  MatX kumodes(nf, 0);  // K * umodes
  MatX gmodes(s.grid_size(), 0);

  const int cap = std::min(options.max_rank, 50);
  double first_amp = 0.0;
  for (int mode = 0; mode < cap; ++mode) {
    VecX S = VecX::Ones(s.grid_size());
    VecX R = VecX::Zero(nf);
    VecX r_old = R, s_old = S;
    double change = 1.0;
    int sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
      // R-step: (S^T M S) K R = F (k^T M S) - K U (G^T M S).
      const VecX ms_s = ms * S;
      const double sms = S.dot(ms_s);
      if (sms <= 0.0) break;
      VecX rhs = fspace * (kmat.transpose() * ms_s);
      if (umodes.cols() > 0) rhs -= kumodes * (gmodes.transpose() * ms_s);
      R = chol.solve(rhs) / sms;
      // S-step, nodal because M_s is invertible.
      const VecX kr = kff * R;
      const double rkr = R.dot(kr);
      if (rkr <= 0.0) break;
      S = kmat * (fspace.transpose() * R);
      if (umodes.cols() > 0) S -= gmodes * (umodes.transpose() * kr);
      S /= rkr;

      const double scale = R.norm() * S.norm();
      change = scale > 0.0 ? outer_diff_norm(R, S, r_old, s_old) / scale : 0.0;
      r_old = R;
      s_old = S;
      if (sweep > 0 && change < options.fixed_point_tol) break;
    }
    const double amp = R.norm() * S.norm();
    if (!(amp > 0.0)) break;
    if (mode == 0) first_amp = amp;
    if (mode > 0 && amp < options.enrich_tol * first_amp) break;
    if (sweep == options.max_sweeps) {
      if (options.fail_on_stall) {
        throw EnrichmentError("mode " + std::to_string(mode) + " did not settle after " +
                                  std::to_string(options.max_sweeps) + " sweeps",
                              mode, change);
      }
      const std::string msg = "pgd mode " + std::to_string(mode) + " accepted unsettled, change " +
                              std::to_string(change);
      spdlog::warn(msg);
      rep.warnings.push_back(msg);
    }
    umodes.conservativeResize(Eigen::NoChange, umodes.cols() + 1);
    umodes.col(umodes.cols() - 1) = R;
    kumodes.conservativeResize(Eigen::NoChange, kumodes.cols() + 1);
    kumodes.col(kumodes.cols() - 1) = kff * R;
    gmodes.conservativeResize(Eigen::NoChange, gmodes.cols() + 1);
    gmodes.col(gmodes.cols() - 1) = S;
    rep.sweeps.push_back(std::min(sweep + 1, options.max_sweeps));
    rep.amplitudes.push_back(amp);
    if (mode + 1 == cap) rep.reached_rank_cap = true;
  }

  for (int i = 0; i < umodes.cols(); ++i) {
    VecX full = VecX::Zero(sol.num_space_dofs());
    for (int f = 0; f < nf; ++f) full[dofs.free[f]] = umodes(f, i);
    sol.append_term(full, {gmodes.col(i)});
  }
  sol.normalize();
  return sol;
}

}  // namespace morph::mor
