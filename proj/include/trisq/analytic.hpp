#pragma once

#include <map>
#include <optional>

#include "trisq/local.hpp"

namespace trisq {

/// A real number with an absolute error bound.
struct ApproxReal {
  double value = 0.0;
  double error = 0.0;
};

/// L(2, chi) by direct summation. The tail is the period mean times the
/// harmonic-square tail plus an Abel-summation bound on the zero-mean part,
/// so the reported error is rigorous and at most `tolerance`.
ApproxReal dirichlet_L2(const QuadraticCharacter& chi, double tolerance = 1e-10);

/// sum over d | n of chi(d) / d.
double sigma_twisted(Integer n, const QuadraticCharacter& chi);

/// Number of divisors.
Integer sigma_zero(Integer n);

/// Allowed range [min, max] for ord_p of admissible targets.
struct ExponentRule {
  int min = 0;
  std::optional<int> max;
};
using AdmissibleExponents = std::map<Integer, ExponentRule>;

/// Exponent rules for targets mu n + rho: ord_p is pinned where the progression
/// fixes it, and ord_p <= 1 at odd primes dividing the level.
AdmissibleExponents admissible_exponents(const CongruenceForm& form);

/// inf over admissible n of n^eps sigma_chi(n) / sigma_0(n), computed prime by prime.
/// With no rules every n >= 1 is admissible.
double constant_Ceps(const QuadraticCharacter& chi, double epsilon, const AdmissibleExponents& rules = {});

/// pi^2 / (L(2,chi) sqrt D) * prod_{p | N} b_p / (1 - chi(p) p^-2).
double constant_CE(const FormGeometry& geometry, const QuadraticCharacter& chi, const ApproxReal& l2,
                   const std::map<Integer, Rational>& floors);

/// Least N0 with C_E C_eps n^{1-eps} > C_G n^{1/2} for every n >= N0.
Integer crossover_bound(double c_e, double c_g, double c_eps, double epsilon);

/// Eisenstein part of a quaternary theta series through the Siegel-Minkowski product.
/// Densities at p | N are counted; all other primes collapse into L(2, chi) and a
/// finite product over p | n.
class EisensteinSeries {
 public:
  explicit EisensteinSeries(CongruenceForm form, double tolerance = 1e-10);

  LocalDensityEngine& local() { return engine_; }
  const ApproxReal& l2() const { return l2_; }

  ApproxReal coefficient(Integer n);
  /// r_Q(n) - a_E(n) given the exact representation number.
  double residual(Integer n, Integer representation_number);
  /// r_Q(n) - a_E(n) with r_Q(n) enumerated directly.
  double residual(Integer n);

 private:
  LocalDensityEngine engine_;
  ApproxReal l2_;
};

ApproxReal eisenstein_coefficient(const CongruenceForm& form, Integer n, double tolerance = 1e-10);
double cusp_residual(const CongruenceForm& form, Integer n);

struct AnalyticProfile {
  CongruenceForm form;
  FormGeometry geometry;
  Integer character = 1;  // D of chi_D
  ApproxReal l2;
  std::map<Integer, DensityFloor> floors;
  double c_e = 0.0;
  double epsilon = 0.25;
  double c_eps = 0.0;
  std::optional<double> c_g;
  std::optional<Integer> crossover;
};

/// All constants for a form with at least one triangular term. C_G is external input.
AnalyticProfile analytic_profile(const CongruenceForm& form, double epsilon, std::optional<double> c_g = std::nullopt,
                                 double tolerance = 1e-10);

}  // namespace trisq
