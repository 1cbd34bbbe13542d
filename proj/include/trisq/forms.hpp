#pragma once

#include <span>
#include <string>
#include <vector>

#include "trisq/polygonal.hpp"

namespace trisq {

/// q * z^2 with z restricted to residue (mod modulus).
struct CongruenceTerm {
  Integer coefficient = 1;
  Integer modulus = 1;
  Integer residue = 0;

  bool operator==(const CongruenceTerm&) const = default;
};

/// Diagonal quadratic form with per-variable congruence conditions, together with
/// the shift (mu, rho) tying it to a polygonal sum F: r_F(n) = r_Q(mu n + rho).
struct CongruenceForm {
  std::vector<CongruenceTerm> terms;
  Integer mu = 1;
  Integer rho = 0;

  std::size_t rank() const { return terms.size(); }
  /// True iff z satisfies every congruence condition.
  bool admits(std::span<const Integer> z) const;
  Integer evaluate(std::span<const Integer> z) const;
  /// Target mu * n + rho of a polygonal value n.
  Integer target(Integer n) const { return mu * n + rho; }
  std::string to_string() const;

  bool operator==(const CongruenceForm&) const = default;
};

/// Unconstrained diagonal form sum q_i z_i^2 (mu = 1, rho = 0).
CongruenceForm diagonal_form(std::span<const Integer> coefficients);
inline CongruenceForm diagonal_form(std::initializer_list<Integer> coefficients) {
  return diagonal_form(std::span<const Integer>(coefficients.begin(), coefficients.size()));
}

/// Completes the square term by term: a P3(x) -> a (2x+1)^2 with mu = 8,
/// b P4(y) -> 2b (2y)^2. A sum of squares maps to itself with mu = 1, rho = 0.
CongruenceForm complete_squares(const PolygonalSum& sum);

struct FormGeometry {
  std::vector<Integer> hessian_diagonal;  // 2 q_i
  Integer discriminant = 1;               // product of the Hessian diagonal
  Integer level = 1;                      // least N with N / (2 q_i) even for all i
};

FormGeometry geometry(const CongruenceForm& form);

/// Number of admissible integer tuples with Q(z) = n, by direct enumeration.
Integer form_representation_count(const CongruenceForm& form, Integer n);

/// r_Q(n) for n in [0, bound], by convolving per-variable value tables.
std::vector<Integer> theta_coefficients(const CongruenceForm& form, Integer bound, unsigned threads = 1);

}  // namespace trisq
