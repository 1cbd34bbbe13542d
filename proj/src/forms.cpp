#include "trisq/forms.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "trisq/parallel.hpp"

namespace trisq {

namespace {

Integer floor_mod(Integer a, Integer m) {
  Integer r = a % m;
  return r < 0 ? r + m : r;
}

Integer isqrt(Integer v) {
  auto r = static_cast<Integer>(std::sqrt(static_cast<long double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

bool in_class(const CongruenceTerm& t, Integer z) { return floor_mod(z, t.modulus) == t.residue; }

Integer count_from(const CongruenceForm& form, std::size_t k, Integer remaining) {
  const CongruenceTerm& t = form.terms[k - 1];
  if (k == 1) {
    if (remaining % t.coefficient != 0) return 0;
    const Integer v = remaining / t.coefficient;
    const Integer s = isqrt(v);
    if (s * s != v) return 0;
    if (s == 0) return in_class(t, 0) ? 1 : 0;
    return (in_class(t, s) ? 1 : 0) + (in_class(t, -s) ? 1 : 0);
  }
  Integer total = 0;
  const Integer s = isqrt(remaining / t.coefficient);
  for (Integer z = -s; z <= s; ++z) {
    if (!in_class(t, z)) continue;
    total += count_from(form, k - 1, remaining - t.coefficient * z * z);
  }
  return total;
}

/// (value, multiplicity) pairs of q z^2 <= bound over the admissible class.
std::vector<std::pair<Integer, Integer>> value_multiplicities(const CongruenceTerm& t, Integer bound) {
  std::vector<std::pair<Integer, Integer>> out;
  for (Integer z = 0; t.coefficient * z * z <= bound; ++z) {
    Integer mult = (in_class(t, z) ? 1 : 0) + (z != 0 && in_class(t, -z) ? 1 : 0);
    if (mult != 0) out.emplace_back(t.coefficient * z * z, mult);
  }
  return out;
}

}  // namespace

bool CongruenceForm::admits(std::span<const Integer> z) const {
  if (z.size() != terms.size()) return false;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (!in_class(terms[i], z[i])) return false;
  return true;
}

Integer CongruenceForm::evaluate(std::span<const Integer> z) const {
  if (z.size() != terms.size()) throw std::invalid_argument("tuple length does not match the form rank");
  Integer total = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) total += terms[i].coefficient * z[i] * z[i];
  return total;
}

std::string CongruenceForm::to_string() const {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += " + ";
    if (t.coefficient != 1) out += std::to_string(t.coefficient) + "*";
    if (t.modulus == 1) {
      out += "z^2";
    } else {
      out += "(" + std::to_string(t.modulus) + "z";
      if (t.residue != 0) out += "+" + std::to_string(t.residue);
      out += ")^2";
    }
  }
  if (out.empty()) out = "0";
  return out;
}

CongruenceForm diagonal_form(std::span<const Integer> coefficients) {
  CongruenceForm f;
  for (Integer q : coefficients) {
    if (q < 1) throw std::invalid_argument("form coefficients must be positive");
    f.terms.push_back({q, 1, 0});
  }
  return f;
}

CongruenceForm complete_squares(const PolygonalSum& sum) {
  if (!sum.is_triangular_square())
    throw std::invalid_argument("completing the square needs orders 3 and 4 only: " + sum.to_string());
  CongruenceForm f;
  bool any_triangular = false;
  for (const Term& t : sum.terms()) any_triangular |= t.order == 3;
  if (!any_triangular) {
    for (const Term& t : sum.terms()) f.terms.push_back({t.coefficient, 1, 0});
    return f;
  }
  f.mu = 8;
  for (const Term& t : sum.terms()) {
    if (t.order == 3) {
      f.terms.push_back({t.coefficient, 2, 1});
      f.rho += t.coefficient;
    } else {
      f.terms.push_back({2 * t.coefficient, 2, 0});
    }
  }
  return f;
}

FormGeometry geometry(const CongruenceForm& form) {
  FormGeometry g;
  __int128 d = 1;
  for (const auto& t : form.terms) {
    g.hessian_diagonal.push_back(2 * t.coefficient);
    d *= 2 * t.coefficient;
    if (d > std::numeric_limits<Integer>::max()) throw std::overflow_error("discriminant overflows 64 bits");
    // N / (2q) even  <=>  4q | N
    g.level = std::lcm(g.level, 4 * t.coefficient);
  }
  g.discriminant = static_cast<Integer>(d);
  return g;
}

Integer form_representation_count(const CongruenceForm& form, Integer n) {
  if (n < 0) return 0;
  if (form.terms.empty()) return n == 0 ? 1 : 0;
  return count_from(form, form.rank(), n);
}

std::vector<Integer> theta_coefficients(const CongruenceForm& form, Integer bound, unsigned threads) {
  if (bound < 1) throw std::invalid_argument("theta bound must be positive");
  if (bound > Integer{1} << 28) throw ResourceLimitError("theta bound " + std::to_string(bound) + " is too large");
  const auto size = static_cast<std::size_t>(bound) + 1;
  std::vector<Integer> coeffs(size, 0);
  coeffs[0] = 1;
  for (const auto& t : form.terms) {
    const auto values = value_multiplicities(t, bound);
    std::vector<Integer> next(size, 0);
    parallel_chunks(size, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        Integer acc = 0;
        for (const auto& [v, mult] : values) {
          if (static_cast<std::size_t>(v) > i) break;
          acc += coeffs[i - static_cast<std::size_t>(v)] * mult;
        }
        next[i] = acc;
      }
    });
    coeffs = std::move(next);
  }
  return coeffs;
}

}  // namespace trisq
