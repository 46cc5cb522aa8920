#pragma once

#include "morph/core.hpp"
#include "morph/fem/kinematics.hpp"

#include <Eigen/Core>

#include <string>

namespace morph::fem {

enum class LawKind { Linear, NeoHookean };

/// Isotropic elastic law. The linear law is geometrically linear
/// (small strain), the Neo-Hookean law is the compressible form
/// W = mu/2 (I1 - 3) - mu ln J + lambda/2 (ln J)^2.
struct MaterialLaw {
  LawKind kind = LawKind::Linear;
  double young_E = 0.0;
  double poisson_nu = 0.0;
  double lame_lambda = 0.0;
  double lame_mu = 0.0;

  static MaterialLaw linear(double young, double poisson);
  static MaterialLaw neo_hookean(double lambda, double mu);
  /// Neo-Hookean law with the same small-strain response as (E, nu).
  static MaterialLaw neo_hookean_from_young(double young, double poisson);

  /// Throws ArgumentError when the parameters violate the admissible ranges.
  void validate() const;
  /// Lame constants, derived from (E, nu) for the linear law.
  double lambda() const;
  double mu() const;
};

std::string to_string(LawKind kind);

struct StressState {
  Mat3 S = Mat3::Zero();      // second Piola-Kirchhoff
  Mat3 P = Mat3::Zero();      // first Piola-Kirchhoff, F S
  Mat3 sigma = Mat3::Zero();  // Cauchy, J^-1 P F^T

  double von_mises() const;
};

/// Strain energy density. Throws InadmissibleStateError when J <= 0 for the
/// Neo-Hookean law.
double strain_energy(const MaterialLaw& law, const DeformationState& state);

/// Stress measures. For the linear law S is the small-strain stress C : eps.
StressState pk2_stress(const MaterialLaw& law, const DeformationState& state);

/// dP/dF flattened row-major: A(3 i + J, 3 k + L) = d P_iJ / d F_kL.
using Tangent9 = Eigen::Matrix<double, 9, 9>;

/// First Piola-Kirchhoff stress and its consistent tangent, the pair used
/// by assembly. For the linear law P is the small-strain stress and A the
/// elasticity tensor.
void first_piola_with_tangent(const MaterialLaw& law, const Mat3& F, Mat3& P, Tangent9& A);

}  // namespace morph::fem
