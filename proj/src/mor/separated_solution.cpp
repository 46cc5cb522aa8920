#include "morph/mor/separated_solution.hpp"

#include <cmath>

namespace morph::mor {

std::string to_string(BuildMethod m) {
  switch (m) {
    case BuildMethod::Pgd: return "pgd";
    case BuildMethod::SparsePgd: return "sparse-pgd";
    case BuildMethod::Pod: return "pod";
  }
  return "pgd";
}

BuildMethod build_method_from_string(const std::string& s) {
  if (s == "pgd") return BuildMethod::Pgd;
  if (s == "sparse-pgd") return BuildMethod::SparsePgd;
  if (s == "pod") return BuildMethod::Pod;
  throw ArgumentError("unknown build method '" + s + "'");
}

SeparatedSolution SeparatedSolution::zero(int num_nodes, int dim, const ParameterSpace& space) {
  SeparatedSolution s;
  s.dim = dim;
  s.num_nodes = num_nodes;
  s.space_modes = MatX::Zero(num_nodes * dim, 0);
  s.parameter_space = space;
  for (int k = 0; k < space.size(); ++k) s.param_modes.emplace_back(MatX::Zero(space[k].grid_size(), 0));
  return s;
}

void SeparatedSolution::validate() const {
  if (space_modes.rows() != num_space_dofs()) throw ArgumentError("space mode length mismatch");
  if (static_cast<int>(param_modes.size()) != parameter_space.size()) {
    throw ArgumentError("one parameter-mode block per parameter expected");
  }
  for (int k = 0; k < parameter_space.size(); ++k) {
    if (param_modes[k].cols() != rank()) throw ArgumentError("parameter modes disagree on rank");
    if (param_modes[k].rows() != parameter_space[k].grid_size()) {
      throw ArgumentError("parameter mode length differs from grid size");
    }
  }
}

VecX SeparatedSolution::term_weights(const VecX& mu, bool* clamped) const {
  if (mu.size() != parameter_space.size()) throw ArgumentError("parameter vector has the wrong length");
  VecX w = VecX::Ones(rank());
  bool any = false;
  for (int k = 0; k < parameter_space.size(); ++k) {
    const GridLocation loc = parameter_space.locate(k, mu[k]);
    any = any || loc.was_clamped;
    const auto& m = param_modes[k];
    for (int i = 0; i < rank(); ++i) {
      w[i] *= (1.0 - loc.weight) * m(loc.segment, i) + loc.weight * m(loc.segment + 1, i);
    }
  }
  if (clamped) *clamped = any;
  return w;
}

VecX SeparatedSolution::term_weight_derivatives(const VecX& mu, int k) const {
  if (k < 0 || k >= parameter_space.size()) throw ArgumentError("parameter index out of range");
  if (mu.size() != parameter_space.size()) throw ArgumentError("parameter vector has the wrong length");
  VecX w = VecX::Ones(rank());
  for (int q = 0; q < parameter_space.size(); ++q) {
    const GridLocation loc = parameter_space.locate(q, mu[q]);
    const auto& m = param_modes[q];
    for (int i = 0; i < rank(); ++i) {
      if (q == k) {
        w[i] *= (m(loc.segment + 1, i) - m(loc.segment, i)) * loc.slope;
      } else {
        w[i] *= (1.0 - loc.weight) * m(loc.segment, i) + loc.weight * m(loc.segment + 1, i);
      }
    }
  }
  return w;
}

VecX SeparatedSolution::evaluate_nodal(const VecX& mu) const {
  if (rank() == 0) return VecX::Zero(num_space_dofs());
  return space_modes * term_weights(mu);
}

SeparatedSolution SeparatedSolution::truncated(int r) const {
  if (r < 0 || r > rank()) throw ArgumentError("truncation rank out of range");
  SeparatedSolution s = *this;
  s.space_modes = space_modes.leftCols(r);
  for (auto& m : s.param_modes) m = m.leftCols(r).eval();
  return s;
}

SeparatedSolution SeparatedSolution::concatenated(const SeparatedSolution& other) const {
  if (other.num_space_dofs() != num_space_dofs() || other.param_modes.size() != param_modes.size()) {
    throw ArgumentError("cannot concatenate solutions with different layouts");
  }
  SeparatedSolution s = *this;
  s.space_modes.resize(num_space_dofs(), rank() + other.rank());
  s.space_modes << space_modes, other.space_modes;
  for (size_t k = 0; k < param_modes.size(); ++k) {
    if (other.param_modes[k].rows() != param_modes[k].rows()) {
      throw ArgumentError("cannot concatenate solutions with different grids");
    }
    s.param_modes[k].resize(param_modes[k].rows(), rank() + other.rank());
    s.param_modes[k] << param_modes[k], other.param_modes[k];
  }
  return s;
}

void SeparatedSolution::append_term(const VecX& space, const std::vector<VecX>& params) {
  if (space.size() != num_space_dofs() || params.size() != param_modes.size()) {
    throw ArgumentError("term layout mismatch");
  }
  space_modes.conservativeResize(Eigen::NoChange, rank() + 1);
  space_modes.col(rank() - 1) = space;
  for (size_t k = 0; k < params.size(); ++k) {
    auto& m = param_modes[k];
    if (params[k].size() != m.rows()) throw ArgumentError("term layout mismatch");
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = params[k];
  }
}

void SeparatedSolution::normalize() {
  for (int i = 0; i < rank(); ++i) {
    const double n = space_modes.col(i).norm();
    if (n == 0.0) continue;
    double scale = 1.0 / n;
    const double big = space_modes.col(i).cwiseAbs().maxCoeff();
    for (int d = 0; d < num_space_dofs(); ++d) {
      const double v = space_modes(d, i);
      if (std::abs(v) > 1e-12 * big) {
        if (v < 0) scale = -scale;
        break;
      }
    }
    space_modes.col(i) *= scale;
    if (!param_modes.empty()) param_modes[0].col(i) /= scale;
  }
}

long long SeparatedSolution::storage_scalars() const {
  long long n = static_cast<long long>(space_modes.size());
  for (const auto& m : param_modes) n += static_cast<long long>(m.size());
  return n;
}

}  // namespace morph::mor
