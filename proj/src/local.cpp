#include "trisq/local.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "ntt.hpp"

namespace trisq {

namespace {

using u128 = unsigned __int128;

BigInt to_big(u128 v) {
  BigInt hi = static_cast<std::uint64_t>(v >> 64U);
  BigInt lo = static_cast<std::uint64_t>(v);
  return (hi << 64) + lo;
}

Rational power_rational(Integer p, int k) {
  return Rational(boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(k)));
}

Integer floor_mod(Integer a, Integer m) {
  Integer r = a % m;
  return r < 0 ? r + m : r;
}

int max_valuation(const std::vector<Integer>& values, Integer p) {
  int m = 0;
  for (Integer v : values) m = std::max(m, valuation(v, p));
  return m;
}

void require_prime(Integer p) {
  if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
}

/// #{x in F_p^m : sum u_i x_i^2 = c} for units u_i and odd p.
BigInt quadric_points(const std::vector<Integer>& units, Integer c, Integer p) {
  const auto m = static_cast<unsigned>(units.size());
  if (m == 0) return c % p == 0 ? 1 : 0;
  Integer disc = 1;
  for (Integer u : units) disc = disc * floor_mod(u, p) % p;
  const BigInt base = boost::multiprecision::pow(BigInt(p), m - 1);
  if (m % 2 == 0) {
    const Integer sign = (m / 2) % 2 == 0 ? 1 : p - 1;
    const int eta = kronecker(disc * sign % p, p);
    const BigInt nu = c % p == 0 ? BigInt(p - 1) : BigInt(-1);
    return base + nu * boost::multiprecision::pow(BigInt(p), (m - 2) / 2) * eta;
  }
  const Integer sign = ((m - 1) / 2) % 2 == 0 ? 1 : p - 1;
  const int eta = kronecker(floor_mod(c, p) * disc % p * sign % p, p);
  return base + boost::multiprecision::pow(BigInt(p), (m - 1) / 2) * eta;
}

}  // namespace

struct LocalDensityEngine::ScaledTerm {
  int valuation;
  Integer unit;
};

Rational LocalDensityEngine::reduce(const std::vector<ScaledTerm>& terms, Integer n, Integer p) {
  const auto r = static_cast<unsigned>(terms.size());
  std::vector<Integer> units;
  for (const auto& t : terms)
    if (t.valuation == 0) units.push_back(t.unit);
  const auto rest = static_cast<unsigned>(r - units.size());
  Rational total = 0;
  if (!units.empty()) {
    const BigInt primitive = quadric_points(units, floor_mod(n, p), p) - (n % p == 0 ? 1 : 0);
    total += Rational(primitive * boost::multiprecision::pow(BigInt(p), rest)) /
             power_rational(p, static_cast<int>(r) - 1);
  }
  if (n % p != 0) return total;
  // Imprimitive unit part: x = p x' turns Q into p (p U + R / p) evaluated at n / p.
  std::vector<ScaledTerm> next;
  for (const auto& t : terms) next.push_back({t.valuation == 0 ? 1 : t.valuation - 1, t.unit});
  total += reduce(next, n / p, p) * Rational(p) / power_rational(p, static_cast<int>(units.size()));
  return total;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

LocalDensityEngine::LocalDensityEngine(CongruenceForm form)
    : form_(std::move(form)), geometry_(trisq::geometry(form_)), character_(geometry_.discriminant) {
  std::set<Integer> primes{2};
  for (Integer p : prime_divisors(geometry_.discriminant)) primes.insert(p);
  bad_primes_.assign(primes.begin(), primes.end());
}

std::shared_ptr<const LocalDensityEngine::Histogram> LocalDensityEngine::distribution(Integer p, int k) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find({p, k}); it != cache_.end()) return it->second;
  }
  const Integer m = checked_pow(p, k);
  if (m > kMaxCountingModulus)
    throw ResourceLimitError("counting modulo " + std::to_string(p) + "^" + std::to_string(k) +
                             " exceeds the budget " + std::to_string(kMaxCountingModulus));
  // Every histogram entry is at most m^rank; the CRT modulus is about 2^86.02.
  if (static_cast<double>(form_.rank()) * std::log2(static_cast<double>(m)) > 86.0)
    throw ResourceLimitError("solution counts modulo " + std::to_string(m) + " would exceed the CRT range");

  const auto size = static_cast<std::size_t>(m);
  Histogram total(size, 0);
  total[0] = 1;
  for (const auto& t : form_.terms) {
    const Integer pe = t.modulus > 1 && t.modulus % p == 0 ? checked_pow(p, valuation(t.modulus, p)) : 1;
    const Integer want = floor_mod(t.residue, pe);
    const auto q = static_cast<std::uint64_t>(floor_mod(t.coefficient, m));
    Histogram h(size, 0);
    for (Integer z = 0; z < m; ++z) {
      if (z % pe != want) continue;
      const auto z2 = static_cast<std::uint64_t>(z) * static_cast<std::uint64_t>(z) % static_cast<std::uint64_t>(m);
      h[z2 * q % static_cast<std::uint64_t>(m)] += 1;
    }
    total = detail::cyclic_convolution(total, h);
  }
  auto shared = std::make_shared<const Histogram>(std::move(total));
  std::lock_guard lock(mutex_);
  return cache_.try_emplace({p, k}, std::move(shared)).first->second;
}

BigInt LocalDensityEngine::count_solutions(Integer n, Integer p, int k) {
  require_prime(p);
  if (k < 1) throw std::invalid_argument("counting exponent must be positive");
  const auto dist = distribution(p, k);
  const Integer m = static_cast<Integer>(dist->size());
  return to_big((*dist)[static_cast<std::size_t>(floor_mod(n, m))]);
}

int LocalDensityEngine::stabilization_exponent(Integer n, Integer p) const {
  if (n == 0) throw std::invalid_argument("local densities are computed for nonzero targets");
  std::vector<Integer> coefficients, moduli;
  for (const auto& t : form_.terms) {
    coefficients.push_back(t.coefficient);
    moduli.push_back(t.modulus);
  }
  // Every solution mod p^k (k > ord n) has gradient valuation
  // g <= (ord n + max ord q)/2 + ord 2, and such solutions lift uniformly once k >= 2g + 1.
  const int two = p == 2 ? 1 : 0;
  return valuation(n, p) + max_valuation(coefficients, p) + 2 * two + 1 + max_valuation(moduli, p);
}

LocalDensity LocalDensityEngine::density_by_counting(Integer n, Integer p) {
  require_prime(p);
  const int k = stabilization_exponent(n, p);
  const int r = static_cast<int>(form_.rank());
  const Rational at_k = Rational(count_solutions(n, p, k)) / power_rational(p, k * (r - 1));
  const Rational at_next = Rational(count_solutions(n, p, k + 1)) / power_rational(p, (k + 1) * (r - 1));
  if (at_k != at_next)
    throw std::runtime_error("local density at " + std::to_string(p) + " did not stabilize at exponent " +
                             std::to_string(k));
  return LocalDensity{p, n, at_k, DensityMethod::counting, k};
}

Rational LocalDensityEngine::density_closed_form(Integer n, Integer p) const {
  require_prime(p);
  if (form_.rank() != 4) throw std::invalid_argument("the closed form applies to quaternary forms only");
  if (geometry_.level % p == 0) throw std::invalid_argument("the closed form needs p coprime to the level");
  if (n == 0) throw std::invalid_argument("local densities are computed for nonzero targets");
  const int chi = character_(p);
  const int t = valuation(n, p);
  Rational sum = 0;
  Rational term = 1;
  for (int j = 0; j <= t; ++j) {
    sum += term;
    term *= Rational(chi, p);
  }
  return (1 - Rational(chi, p * p)) * sum;
}

Rational LocalDensityEngine::density_by_reduction(Integer n, Integer p) const {
  require_prime(p);
  if (p == 2) throw std::invalid_argument("the reduction applies at odd primes only");
  if (n == 0) throw std::invalid_argument("local densities are computed for nonzero targets");
  std::vector<ScaledTerm> terms;
  for (const auto& t : form_.terms) {
    if (t.modulus % p == 0) throw std::invalid_argument("the reduction needs p coprime to every congruence modulus");
    const int a = valuation(t.coefficient, p);
    terms.push_back({a, t.coefficient / checked_pow(p, a)});
  }
  return reduce(terms, n, p);
}

LocalDensity LocalDensityEngine::density(Integer n, Integer p) {
  require_prime(p);
  if (form_.rank() == 4 && geometry_.level % p != 0)
    return LocalDensity{p, n, density_closed_form(n, p), DensityMethod::closed_form, 0};
  const bool odd_moduli = std::any_of(form_.terms.begin(), form_.terms.end(),
                                      [p](const CongruenceTerm& t) { return t.modulus % p == 0; });
  if (p != 2 && !odd_moduli) return LocalDensity{p, n, density_by_reduction(n, p), DensityMethod::reduction, 0};
  return density_by_counting(n, p);
}

bool LocalDensityEngine::locally_represented(Integer n, std::span<const Integer> extra_primes) {
  if (n < 0) return false;
  if (n == 0) {
    return std::all_of(form_.terms.begin(), form_.terms.end(),
                       [](const CongruenceTerm& t) { return floor_mod(t.residue, t.modulus) == 0; });
  }
  std::set<Integer> primes(bad_primes_.begin(), bad_primes_.end());
  primes.insert(extra_primes.begin(), extra_primes.end());
  for (Integer p : primes)
    if (density(n, p).value == 0) return false;
  return true;
}

DensityFloor LocalDensityEngine::density_floor(Integer p) {
  require_prime(p);
  if (geometry_.level % p != 0) throw std::invalid_argument("density floors are taken at primes dividing the level");
  const int r = static_cast<int>(form_.rank());
  std::vector<Integer> coefficients, moduli;
  for (const auto& t : form_.terms) {
    coefficients.push_back(t.coefficient);
    moduli.push_back(t.modulus);
  }
  const int base = max_valuation(coefficients, p) + max_valuation(moduli, p) + (p == 2 ? 3 : 1);

  // Minimum of beta_p over admissible classes modulo p^level, considering only
  // classes whose density is already determined at that level.
  auto scan = [&](int level, bool odd_rule) -> std::optional<DensityFloor> {
    const Integer modulus = checked_pow(p, level);
    const Integer step = std::gcd(form_.mu, modulus);
    const auto dist = distribution(p, level);
    const Rational scale = power_rational(p, level * (r - 1));
    DensityFloor best;
    best.prime = p;
    best.class_modulus = modulus;
    bool any = false;
    for (Integer c = floor_mod(form_.rho, step); c < modulus; c += step) {
      if (c == 0) continue;
      const int t = valuation(c, p);
      if (odd_rule && t > 1) continue;
      if (t + base > level) continue;
      const Rational beta = Rational(to_big((*dist)[static_cast<std::size_t>(c)])) / scale;
      if (beta == 0) {
        ++best.zero_classes;
        continue;
      }
      if (!any || beta < best.beta_min) {
        best.beta_min = beta;
        best.attained_at = c;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    return best;
  };

  std::optional<DensityFloor> floor;
  if (p != 2) {
    floor = scan(base + 1, true);
  } else {
    const int start = std::max(base, valuation(form_.mu, 2));
    std::optional<DensityFloor> previous;
    for (int level = start; checked_pow(2, level) <= kMaxCountingModulus; ++level) {
      auto current = scan(level, false);
      if (current && previous && current->beta_min == previous->beta_min) {
        floor = current;
        break;
      }
      previous = std::move(current);
    }
    if (!floor && previous)
      throw std::runtime_error("2-adic density floor did not stabilize within the counting budget");
  }
  if (!floor) throw std::domain_error("no admissible class is locally represented at " + std::to_string(p));
  floor->value = floor->beta_min * Rational(checked_pow(p, valuation(4, p)));
  return *floor;
}

BigInt count_solutions_mod(const CongruenceForm& form, Integer n, Integer p, int k) {
  return LocalDensityEngine(form).count_solutions(n, p, k);
}

LocalDensity local_density(const CongruenceForm& form, Integer n, Integer p) {
  return LocalDensityEngine(form).density(n, p);
}

bool locally_represented(const CongruenceForm& form, Integer n, std::span<const Integer> extra_primes) {
  return LocalDensityEngine(form).locally_represented(n, extra_primes);
}

DensityFloor density_floor(const CongruenceForm& form, Integer p) { return LocalDensityEngine(form).density_floor(p); }

}  // namespace trisq
