#include "trisq/polygonal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trisq/parallel.hpp"

namespace trisq {

namespace {

void check_order(int order) {
  if (order < 3) throw std::invalid_argument("polygonal order must be at least 3, got " + std::to_string(order));
}

Integer isqrt(Integer v) {
  if (v < 0) return -1;
  auto r = static_cast<Integer>(std::sqrt(static_cast<long double>(v)));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

/// All integers x with P_m(x) == v.
std::vector<Integer> polygonal_roots(int order, Integer v) {
  std::vector<Integer> roots;
  if (v < 0) return roots;
  // (m-2)x^2 - (m-4)x - 2v = 0
  const Integer a = order - 2;
  const Integer b = order - 4;
  const Integer disc = b * b + 8 * a * v;
  const Integer s = isqrt(disc);
  if (s * s != disc) return roots;
  for (Integer num : {b + s, b - s}) {
    if (num % (2 * a) == 0) {
      Integer x = num / (2 * a);
      if (roots.empty() || roots.front() != x) roots.push_back(x);
    }
  }
  return roots;
}

/// Calls fn(x, value) for every x with coefficient * P_m(x) <= budget.
template <typename Fn>
void for_each_bounded(const Term& t, Integer budget, Fn&& fn) {
  for (Integer x = 0;; ++x) {
    const Integer v = t.coefficient * polygonal(t.order, x);
    if (v > budget) break;
    if (!fn(x, v)) return;
  }
  for (Integer x = -1;; --x) {
    const Integer v = t.coefficient * polygonal(t.order, x);
    if (v > budget) break;
    if (!fn(x, v)) return;
  }
}

bool search(const std::vector<Term>& terms, std::size_t k, Integer remaining, std::vector<Integer>& x) {
  const Term& t = terms[k - 1];
  if (k == 1) {
    if (remaining % t.coefficient != 0) return false;
    auto roots = polygonal_roots(t.order, remaining / t.coefficient);
    if (roots.empty()) return false;
    x[0] = roots.front();
    return true;
  }
  bool found = false;
  for_each_bounded(t, remaining, [&](Integer xi, Integer v) {
    x[k - 1] = xi;
    found = search(terms, k - 1, remaining - v, x);
    return !found;
  });
  return found;
}

Integer count(const std::vector<Term>& terms, std::size_t k, Integer remaining) {
  const Term& t = terms[k - 1];
  if (k == 1) {
    if (remaining % t.coefficient != 0) return 0;
    return static_cast<Integer>(polygonal_roots(t.order, remaining / t.coefficient).size());
  }
  Integer total = 0;
  for_each_bounded(t, remaining, [&](Integer, Integer v) {
    total += count(terms, k - 1, remaining - v);
    return true;
  });
  return total;
}

}  // namespace

Integer polygonal(int order, Integer x) {
  check_order(order);
  const __int128 m = order;
  const __int128 v = ((m - 2) * x * x - (m - 4) * x) / 2;
  return static_cast<Integer>(v);
}

PolygonalSum::PolygonalSum(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const Term& t : terms_) {
    if (t.coefficient < 1) throw std::invalid_argument("coefficients must be positive");
    check_order(t.order);
  }
  std::sort(terms_.begin(), terms_.end());
}

bool PolygonalSum::is_triangular_square() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.order == 3 || t.order == 4; });
}

PolygonalSum PolygonalSum::with(Term t) const {
  auto terms = terms_;
  terms.push_back(t);
  return PolygonalSum(std::move(terms));
}

PolygonalSum PolygonalSum::operator+(const PolygonalSum& other) const {
  auto terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return PolygonalSum(std::move(terms));
}

Integer PolygonalSum::evaluate(std::span<const Integer> x) const {
  if (x.size() != terms_.size()) throw std::invalid_argument("assignment length does not match the number of terms");
  Integer total = 0;
  for (std::size_t i = 0; i < terms_.size(); ++i) total += terms_[i].coefficient * polygonal(terms_[i].order, x[i]);
  return total;
}

std::string PolygonalSum::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const Term& t : terms_) {
    if (!out.empty()) out += '+';
    if (t.coefficient != 1) out += std::to_string(t.coefficient);
    out += 'P';
    out += std::to_string(t.order);
  }
  return out;
}

std::optional<Witness> represents(const PolygonalSum& sum, Integer n) {
  if (n < 0) return std::nullopt;
  if (sum.empty()) {
    if (n == 0) return Witness{{}, 0};
    return std::nullopt;
  }
  std::vector<Integer> x(sum.size(), 0);
  if (!search(sum.terms(), sum.size(), n, x)) return std::nullopt;
  return Witness{std::move(x), n};
}

Integer representation_count(const PolygonalSum& sum, Integer n) {
  if (n < 0) return 0;
  if (sum.empty()) return n == 0 ? 1 : 0;
  return count(sum.terms(), sum.size(), n);
}

std::vector<Integer> term_values(const Term& term, Integer bound) {
  std::vector<Integer> values;
  for_each_bounded(term, bound, [&](Integer, Integer v) {
    values.push_back(v);
    return true;
  });
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

RepresentedSet::RepresentedSet(PolygonalSum source, BitTable table)
    : source_(std::move(source)), table_(std::move(table)) {}

bool RepresentedSet::contains(Integer n) const {
  if (n < 0 || n > bound()) return false;
  return table_.test(static_cast<std::size_t>(n));
}

std::optional<Integer> RepresentedSet::first_missing(Integer from) const {
  if (from > bound()) return std::nullopt;
  auto i = table_.first_clear(static_cast<std::size_t>(std::max<Integer>(from, 0)));
  if (!i) return std::nullopt;
  return static_cast<Integer>(*i);
}

std::vector<Integer> RepresentedSet::missing(Integer from) const {
  std::vector<Integer> out;
  for (auto n = first_missing(from); n; n = first_missing(*n + 1)) out.push_back(*n);
  return out;
}

RepresentedSet represented_set(const PolygonalSum& sum, Integer bound, unsigned threads) {
  if (bound < 1) throw std::invalid_argument("sieve bound must be positive");
  if (bound > kMaxSieveBound)
    throw ResourceLimitError("sieve bound " + std::to_string(bound) + " exceeds the limit " +
                             std::to_string(kMaxSieveBound));
  const auto size = static_cast<std::size_t>(bound) + 1;

  std::vector<std::vector<Integer>> steps;
  steps.reserve(sum.size());
  for (const Term& t : sum.terms()) steps.push_back(term_values(t, bound));
  // The widest term seeds the table for free.
  std::stable_sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

  BitTable table(size);
  if (steps.empty()) {
    table.set(0);
    return RepresentedSet(sum, std::move(table));
  }
  for (Integer v : steps.front()) table.set(static_cast<std::size_t>(v));

  for (std::size_t s = 1; s < steps.size(); ++s) {
    BitTable next(size);
    const auto& values = steps[s];
    parallel_chunks(table.word_count(), threads, [&](std::size_t lo, std::size_t hi) {
      for (Integer v : values) next.or_shifted(table, static_cast<std::size_t>(v), lo, hi);
    });
    next.trim();
    table = std::move(next);
  }
  return RepresentedSet(sum, std::move(table));
}

std::optional<Integer> truant(const PolygonalSum& sum, Integer cap) {
  if (cap < 1) throw std::invalid_argument("truant cap must be positive");
  if (sum.empty()) return Integer{1};
  return represented_set(sum, cap).first_missing(1);
}

}  // namespace trisq
