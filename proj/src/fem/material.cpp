#include "morph/fem/material.hpp"

#include <Eigen/LU>

#include <cmath>

namespace morph::fem {

MaterialLaw MaterialLaw::linear(double young, double poisson) {
  MaterialLaw law;
  law.kind = LawKind::Linear;
  law.young_E = young;
  law.poisson_nu = poisson;
  law.validate();
  return law;
}

MaterialLaw MaterialLaw::neo_hookean(double lambda, double mu) {
  MaterialLaw law;
  law.kind = LawKind::NeoHookean;
  law.lame_lambda = lambda;
  law.lame_mu = mu;
  law.validate();
  return law;
}

MaterialLaw MaterialLaw::neo_hookean_from_young(double young, double poisson) {
  const MaterialLaw lin = linear(young, poisson);
  return neo_hookean(lin.lambda(), lin.mu());
}

void MaterialLaw::validate() const {
  if (kind == LawKind::Linear) {
    if (!(young_E > 0.0)) throw ArgumentError("Young's modulus must be positive");
    if (!(poisson_nu > -1.0 && poisson_nu < 0.5)) {
      throw ArgumentError("Poisson ratio must lie in (-1, 0.5)");
    }
  } else {
    if (!(lame_mu > 0.0)) throw ArgumentError("shear modulus must be positive");
    if (!(lame_lambda >= 0.0)) throw ArgumentError("Lame lambda must be non-negative");
  }
}

double MaterialLaw::lambda() const {
  if (kind == LawKind::NeoHookean) return lame_lambda;
  return young_E * poisson_nu / ((1 + poisson_nu) * (1 - 2 * poisson_nu));
}

double MaterialLaw::mu() const {
  if (kind == LawKind::NeoHookean) return lame_mu;
  return young_E / (2 * (1 + poisson_nu));
}

std::string to_string(LawKind kind) { return kind == LawKind::Linear ? "linear" : "neo-hookean"; }

double StressState::von_mises() const {
  const Mat3 dev = sigma - sigma.trace() / 3.0 * Mat3::Identity();
  return std::sqrt(1.5 * dev.cwiseProduct(dev).sum());
}

namespace {

void require_admissible(const DeformationState& state) {
  if (!(state.Jdet > 0.0)) {
    throw InadmissibleStateError("inadmissible state: det F = " + std::to_string(state.Jdet));
  }
}

Mat3 linear_stress(const MaterialLaw& law, const Mat3& eps) {
  return law.lambda() * eps.trace() * Mat3::Identity() + 2.0 * law.mu() * eps;
}

}  // namespace

double strain_energy(const MaterialLaw& law, const DeformationState& state) {
  if (law.kind == LawKind::Linear) {
    const Mat3 eps = state.small_strain();
    const double tr = eps.trace();
    return law.mu() * eps.cwiseProduct(eps).sum() + 0.5 * law.lambda() * tr * tr;
  }
  require_admissible(state);
  const double lnJ = std::log(state.Jdet);
  const double mu = law.lame_mu;
  return 0.5 * mu * (state.I1() - 3.0) - mu * lnJ + 0.5 * law.lame_lambda * lnJ * lnJ;
}

StressState pk2_stress(const MaterialLaw& law, const DeformationState& state) {
  StressState out;
  if (law.kind == LawKind::Linear) {
    out.S = linear_stress(law, state.small_strain());
  } else {
    require_admissible(state);
    const Mat3 Cinv = state.C.inverse();
    const double lnJ = std::log(state.Jdet);
    out.S = law.lame_mu * (Mat3::Identity() - Cinv) + law.lame_lambda * lnJ * Cinv;
    out.S = 0.5 * (out.S + out.S.transpose());
  }
  out.P = state.F * out.S;
  out.sigma = out.P * state.F.transpose() / state.Jdet;
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  return out;
}

void first_piola_with_tangent(const MaterialLaw& law, const Mat3& F, Mat3& P, Tangent9& A) {
  A.setZero();
  const double lam = law.lambda();
  const double mu = law.mu();
  if (law.kind == LawKind::Linear) {
    const Mat3 h = F - Mat3::Identity();
    P = linear_stress(law, 0.5 * (h + h.transpose()));
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J)
        for (int k = 0; k < 3; ++k)
          for (int L = 0; L < 3; ++L) {
            double v = 0.0;
            if (i == J && k == L) v += lam;
            if (i == k && J == L) v += mu;
            if (i == L && J == k) v += mu;
            A(3 * i + J, 3 * k + L) = v;
          }
    return;
  }

  const double J = F.determinant();
  if (!(J > 0.0)) {
    throw InadmissibleStateError("inadmissible state: det F = " + std::to_string(J));
  }
  const Mat3 C = F.transpose() * F;
  const Mat3 Ci = C.inverse();
  const double lnJ = std::log(J);
  const Mat3 S = mu * (Mat3::Identity() - Ci) + lam * lnJ * Ci;
  P = F * S;
  const double c2 = mu - lam * lnJ;

  // Material tensor contracted with F on both sides:
  // A_iJkL = delta_ik S_LJ + F_iI CC_IJLN F_kN,
  // CC_IJLN = lam Ci_IJ Ci_LN + c2 (Ci_IL Ci_JN + Ci_IN Ci_JL).
  const Mat3 FCi = F * Ci;  // FCi(i, J) = F_iI Ci_IJ
  const Mat3 FCiFt = FCi * F.transpose();
  for (int i = 0; i < 3; ++i)
    for (int Jj = 0; Jj < 3; ++Jj)
      for (int k = 0; k < 3; ++k)
        for (int L = 0; L < 3; ++L) {
          double v = (i == k) ? S(L, Jj) : 0.0;
          v += lam * FCi(i, Jj) * FCi(k, L);
          v += c2 * (FCi(i, L) * FCi(k, Jj) + FCiFt(i, k) * Ci(Jj, L));
          A(3 * i + Jj, 3 * k + L) = v;
        }
}

}  // namespace morph::fem
