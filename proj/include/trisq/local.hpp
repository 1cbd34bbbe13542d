#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "trisq/arith.hpp"
#include "trisq/forms.hpp"

namespace trisq {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class DensityMethod { closed_form, counting, reduction };

/// beta_p(n; Q) as an exact rational. For counting, `stabilized_at` is the exponent k
/// at which the normalized count p^{-k(r-1)} N_k(n) was taken, and 0 otherwise.
struct LocalDensity {
  Integer prime = 0;
  Integer target = 0;
  Rational value;
  DensityMethod method = DensityMethod::counting;
  int stabilized_at = 0;
};

/// Lower bound b_p of beta_p over the admissible targets mu n + rho.
/// `value` is in the normalization of the polygonal integral I_p, which is
/// p^{ord_p(4)} times the counting normalization; `beta_min` is the bare minimum
/// of beta_p.
struct DensityFloor {
  Integer prime = 0;
  Rational value;
  Rational beta_min;
  Integer class_modulus = 0;   // targets were scanned as residues modulo this
  Integer attained_at = 0;     // a residue class achieving the minimum
  Integer zero_classes = 0;    // admissible classes with beta_p = 0
};

/// Largest p^k used for counting solutions modulo p^k.
inline constexpr Integer kMaxCountingModulus = Integer{1} << 22;

/// p-adic computations for one congruence form. Solution histograms modulo p^k
/// are cached, so repeated densities for the same form are cheap. Thread-safe.
class LocalDensityEngine {
 public:
  explicit LocalDensityEngine(CongruenceForm form);

  const CongruenceForm& form() const { return form_; }
  const FormGeometry& geometry() const { return geometry_; }
  const QuadraticCharacter& character() const { return character_; }
  /// Primes dividing the level (equivalently 2D).
  const std::vector<Integer>& bad_primes() const { return bad_primes_; }

  /// Tuples modulo p^k in the admissible classes with Q(z) = n (mod p^k).
  /// At odd p the mod-2 conditions are dropped (2 is a p-adic unit).
  BigInt count_solutions(Integer n, Integer p, int k);

  /// Exponent past which p^{-k(r-1)} N_k(n) is constant (Hensel bound for diagonal forms).
  int stabilization_exponent(Integer n, Integer p) const;

  /// beta_p by counting at the stabilization exponent, checked against k + 1.
  LocalDensity density_by_counting(Integer n, Integer p);

  /// (1 - chi(p)/p^2) * sum_{j <= ord_p n} (chi(p)/p)^j; rank 4 with p not dividing N only.
  Rational density_closed_form(Integer n, Integer p) const;

  /// Exact beta_p at odd p dividing no congruence modulus: the p-unit part contributes
  /// its primitive solutions mod p (Hensel), the rest recurses on n/p with Q scaled down.
  Rational density_by_reduction(Integer n, Integer p) const;

  /// Closed form when it applies, then reduction, then counting.
  LocalDensity density(Integer n, Integer p);

  /// beta_p(n) > 0 at every p | 2D and every extra prime.
  bool locally_represented(Integer n, std::span<const Integer> extra_primes = {});

  /// Floor b_p over targets mu n + rho (with ord_p <= 1 when p is odd).
  DensityFloor density_floor(Integer p);

 private:
  using Histogram = std::vector<unsigned __int128>;
  struct ScaledTerm;
  static Rational reduce(const std::vector<ScaledTerm>& terms, Integer n, Integer p);
  std::shared_ptr<const Histogram> distribution(Integer p, int k);

  CongruenceForm form_;
  FormGeometry geometry_;
  QuadraticCharacter character_;
  std::vector<Integer> bad_primes_;
  std::mutex mutex_;
  std::map<std::pair<Integer, int>, std::shared_ptr<const Histogram>> cache_;
};

// Free-function forms of the engine operations.
BigInt count_solutions_mod(const CongruenceForm& form, Integer n, Integer p, int k);
LocalDensity local_density(const CongruenceForm& form, Integer n, Integer p);
bool locally_represented(const CongruenceForm& form, Integer n, std::span<const Integer> extra_primes = {});
DensityFloor density_floor(const CongruenceForm& form, Integer p);

double to_double(const Rational& r);

}  // namespace trisq
