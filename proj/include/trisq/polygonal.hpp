#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "trisq/bit_table.hpp"

namespace trisq {

using Integer = std::int64_t;

/// Thrown when a requested computation exceeds a configured memory/size budget.
/// Kept distinct from mathematical failure so callers can map it to its own exit code.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generalized m-gonal number ((m-2)x^2 - (m-4)x) / 2.
Integer polygonal(int order, Integer x);

/// One summand a * P_m.
struct Term {
  Integer coefficient = 1;
  int order = 3;

  auto operator<=>(const Term&) const = default;
};

/// A formal sum a_1 P_{m_1} + ... + a_r P_{m_r}, stored in canonical order
/// (coefficients ascending, orders ascending within equal coefficients).
/// The empty sum is the constant 0.
class PolygonalSum {
 public:
  PolygonalSum() = default;
  explicit PolygonalSum(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// True iff every order is 3 or 4.
  bool is_triangular_square() const;

  PolygonalSum with(Term t) const;
  PolygonalSum operator+(const PolygonalSum& other) const;

  /// Value at an assignment given in canonical term order.
  Integer evaluate(std::span<const Integer> x) const;

  /// "P3+P4+6P4"; the empty sum prints as "0".
  std::string to_string() const;

  auto operator<=>(const PolygonalSum&) const = default;

 private:
  std::vector<Term> terms_;
};

struct Witness {
  std::vector<Integer> assignment;
  Integer value = 0;
};

/// Finds an assignment with value n, or nothing if n is not represented.
std::optional<Witness> represents(const PolygonalSum& sum, Integer n);

/// Number of ordered assignments in Z^r with value n.
Integer representation_count(const PolygonalSum& sum, Integer n);

/// Dense membership table of the values in [0, bound] taken by a sum.
class RepresentedSet {
 public:
  RepresentedSet(PolygonalSum source, BitTable table);

  Integer bound() const { return static_cast<Integer>(table_.size()) - 1; }
  const PolygonalSum& source() const { return source_; }
  const BitTable& table() const { return table_; }

  bool contains(Integer n) const;
  /// Least n in [from, bound] not represented.
  std::optional<Integer> first_missing(Integer from = 1) const;
  /// All n in [from, bound] not represented.
  std::vector<Integer> missing(Integer from = 1) const;
  Integer count() const { return static_cast<Integer>(table_.count()); }

 private:
  PolygonalSum source_;
  BitTable table_;
};

/// Largest bound represented_set will accept.
inline constexpr Integer kMaxSieveBound = Integer{1} << 32;

/// Distinct values a * P_m(x) in [0, bound], ascending.
std::vector<Integer> term_values(const Term& term, Integer bound);

/// Sieves [0, bound] term by term. With threads > 1 each step is split into
/// disjoint word ranges; the result is identical to the single-threaded table.
RepresentedSet represented_set(const PolygonalSum& sum, Integer bound, unsigned threads = 1);

/// Least positive integer <= cap not represented; nothing when [1, cap] is covered.
/// The empty sum has truant 1.
std::optional<Integer> truant(const PolygonalSum& sum, Integer cap);

}  // namespace trisq
