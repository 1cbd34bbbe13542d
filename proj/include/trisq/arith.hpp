#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace trisq {

using Integer = std::int64_t;

/// Largest e with p^e | n (n != 0).
int valuation(Integer n, Integer p);

bool is_prime(Integer n);

/// Prime factorization of |n| (n != 0) as ascending (prime, exponent) pairs.
std::vector<std::pair<Integer, int>> factorize(Integer n);

std::vector<Integer> prime_divisors(Integer n);

std::vector<Integer> primes_up_to(Integer n);

/// p^k, throwing std::overflow_error past 63 bits.
Integer checked_pow(Integer p, int k);

/// Kronecker symbol (a | n) for any integers a, n.
int kronecker(Integer a, Integer n);

/// n -> (D | n) for a fixed nonzero D = 0, 1 (mod 4); other D throw std::invalid_argument.
class QuadraticCharacter {
 public:
  explicit QuadraticCharacter(Integer discriminant);

  Integer discriminant() const { return d_; }
  int operator()(Integer n) const { return kronecker(d_, n); }
  /// |D|, a period of n -> (D | n) on positive n.
  Integer period() const { return period_; }
  /// True iff the character takes only the values 0 and 1.
  bool is_principal() const;

 private:
  Integer d_;
  Integer period_;
};

}  // namespace trisq
