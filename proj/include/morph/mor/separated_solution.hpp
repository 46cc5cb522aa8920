#pragma once

#include "morph/core.hpp"
#include "morph/fem/material.hpp"
#include "morph/mor/parameter_space.hpp"

#include <string>
#include <vector>

namespace morph::mor {

enum class BuildMethod { Pgd, SparsePgd, Pod };
std::string to_string(BuildMethod m);
BuildMethod build_method_from_string(const std::string& s);

/// U(X, mu) = sum_i F_i(X) * prod_k H_ik(mu_k).
///
/// space_modes holds one nodal vector per column (num_nodes * dim rows,
/// node-major). param_modes[k] holds the grid values of parameter k's modes,
/// one column per term. Between grid nodes parameter modes are linear.
struct SeparatedSolution {
  int dim = 3;
  int num_nodes = 0;
  MatX space_modes;
  std::vector<MatX> param_modes;
  ParameterSpace parameter_space;
  BuildMethod method = BuildMethod::Pgd;
  fem::MaterialLaw law;
  std::string mesh_ref;

  int rank() const { return static_cast<int>(space_modes.cols()); }
  int num_space_dofs() const { return num_nodes * dim; }

  /// Empty (rank-0) solution with the given layout.
  static SeparatedSolution zero(int num_nodes, int dim, const ParameterSpace& space);

  /// Checks that all mode arrays agree on rank and sizes.
  void validate() const;

  /// Per-term parameter factor prod_k H_ik(mu_k), mu clamped into the box.
  VecX term_weights(const VecX& mu, bool* clamped = nullptr) const;
  /// d/d mu_k of term_weights (one-sided slope at knots, see ParameterSpace::locate).
  VecX term_weight_derivatives(const VecX& mu, int k) const;

  /// Full nodal field at mu.
  VecX evaluate_nodal(const VecX& mu) const;

  /// First r terms.
  SeparatedSolution truncated(int r) const;
  /// Appends another solution's terms (same layout).
  SeparatedSolution concatenated(const SeparatedSolution& other) const;

  void append_term(const VecX& space, const std::vector<VecX>& params);
  /// Unit-norm space modes, amplitude moved into the first parameter mode,
  /// first significant space-mode component positive.
  void normalize();

  /// Number of stored scalars in all modes.
  long long storage_scalars() const;
};

}  // namespace morph::mor
