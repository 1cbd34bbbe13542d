#include "trisq/arith.hpp"

#include <limits>
#include <stdexcept>

namespace trisq {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e != 0) {
    if (e & 1U) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1U;
  }
  return r;
}

}  // namespace

int valuation(Integer n, Integer p) {
  if (n == 0) throw std::invalid_argument("valuation of zero is infinite");
  if (p < 2) throw std::invalid_argument("valuation base must be at least 2");
  int e = 0;
  while (n % p == 0) {
    n /= p;
    ++e;
  }
  return e;
}

bool is_prime(Integer n) {
  if (n < 2) return false;
  for (Integer p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  // Deterministic Miller-Rabin for 64-bit inputs.
  u64 d = static_cast<u64>(n) - 1;
  int s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    u64 x = powmod(a, d, static_cast<u64>(n));
    if (x == 1 || x == static_cast<u64>(n) - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, static_cast<u64>(n));
      if (x == static_cast<u64>(n) - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::pair<Integer, int>> factorize(Integer n) {
  if (n == 0) throw std::invalid_argument("cannot factor zero");
  if (n < 0) n = -n;
  std::vector<std::pair<Integer, int>> out;
  for (Integer p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

std::vector<Integer> prime_divisors(Integer n) {
  std::vector<Integer> out;
  for (auto [p, e] : factorize(n)) out.push_back(p);
  return out;
}

std::vector<Integer> primes_up_to(Integer n) {
  std::vector<Integer> out;
  if (n < 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
  for (Integer i = 2; i <= n; ++i) {
    if (composite[static_cast<std::size_t>(i)]) continue;
    out.push_back(i);
    for (Integer j = i * i; j <= n; j += i) composite[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

Integer checked_pow(Integer p, int k) {
  Integer r = 1;
  for (int i = 0; i < k; ++i) {
    if (r > std::numeric_limits<Integer>::max() / p) throw std::overflow_error("power overflows 64 bits");
    r *= p;
  }
  return r;
}

int kronecker(Integer a, Integer n) {
  static constexpr int kTwo[8] = {0, 1, 0, -1, 0, -1, 0, 1};  // (2 | a) indexed by a mod 8
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  if (a % 2 == 0 && n % 2 == 0) return 0;
  int k = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) k = -k;
  }
  while (n % 2 == 0) {
    n /= 2;
    k *= kTwo[a & 7];
  }
  // Jacobi symbol (a | n) with n odd positive depends only on a mod n.
  Integer b = n;
  Integer x = a % b;
  if (x < 0) x += b;
  while (x != 0) {
    while (x % 2 == 0) {
      x /= 2;
      if ((b & 7) == 3 || (b & 7) == 5) k = -k;
    }
    std::swap(x, b);
    if ((x & 3) == 3 && (b & 3) == 3) k = -k;
    x %= b;
  }
  return b == 1 ? k : 0;
}

QuadraticCharacter::QuadraticCharacter(Integer discriminant) : d_(discriminant) {
  if (discriminant == 0) throw std::invalid_argument("character discriminant must be nonzero");
  const Integer r = ((d_ % 4) + 4) % 4;
  // For D = 2, 3 (mod 4) the Kronecker symbol is not a Dirichlet character of n.
  if (r >= 2) throw std::invalid_argument("character discriminant must be 0 or 1 mod 4");
  period_ = d_ < 0 ? -d_ : d_;
}

bool QuadraticCharacter::is_principal() const {
  for (Integer n = 1; n <= period_; ++n)
    if ((*this)(n) == -1) return false;
  return true;
}

}  // namespace trisq
