#include "ntt.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

namespace trisq::detail {

namespace {

using u64 = std::uint64_t;

struct Prime {
  u64 modulus;
  u64 generator;
};

// All three are c * 2^k + 1 with k >= 23 and primitive root 3.
constexpr std::array<Prime, 3> kPrimes{{{998244353, 3}, {167772161, 3}, {469762049, 3}}};

u64 power(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e != 0) {
    if (e & 1U) r = r * a % m;
    a = a * a % m;
    e >>= 1U;
  }
  return r;
}

void transform(std::vector<u64>& a, const Prime& prime, bool inverse) {
  const u64 m = prime.modulus;
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1U;
    for (; j & bit; bit >>= 1U) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1U) {
    u64 w = power(prime.generator, (m - 1) / len, m);
    if (inverse) w = power(w, m - 2, m);
    const std::size_t half = len / 2;
    std::vector<u64> roots(half);
    roots[0] = 1;
    for (std::size_t i = 1; i < half; ++i) roots[i] = roots[i - 1] * w % m;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const u64 u = a[i + j];
        const u64 v = a[i + j + half] * roots[j] % m;
        a[i + j] = u + v < m ? u + v : u + v - m;
        a[i + j + half] = u >= v ? u - v : u + m - v;
      }
    }
  }
  if (inverse) {
    const u64 inv_n = power(n, m - 2, m);
    for (u64& x : a) x = x * inv_n % m;
  }
}

/// Cyclic convolution of length `m` modulo one prime, via a transform of length `len`.
std::vector<u64> convolve_mod(const std::vector<u128>& a, const std::vector<u128>& b, std::size_t len,
                              const Prime& prime) {
  const std::size_t m = a.size();
  std::vector<u64> fa(len, 0), fb(len, 0);
  for (std::size_t i = 0; i < m; ++i) {
    fa[i] = static_cast<u64>(a[i] % prime.modulus);
    fb[i] = static_cast<u64>(b[i] % prime.modulus);
  }
  transform(fa, prime, false);
  transform(fb, prime, false);
  for (std::size_t i = 0; i < len; ++i) fa[i] = fa[i] * fb[i] % prime.modulus;
  transform(fa, prime, true);
  if (len == m) return fa;
  std::vector<u64> folded(m, 0);
  for (std::size_t i = 0; i < len; ++i) {
    u64& slot = folded[i % m];
    slot += fa[i];
    if (slot >= prime.modulus) slot -= prime.modulus;
  }
  return folded;
}

}  // namespace

std::vector<u128> cyclic_convolution(const std::vector<u128>& a, const std::vector<u128>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cyclic convolution needs equal lengths");
  const std::size_t m = a.size();
  if (m == 0) return {};
  const std::size_t len = std::has_single_bit(m) ? m : std::bit_ceil(2 * m - 1);
  if (len > kMaxTransform) throw std::length_error("convolution length exceeds the NTT limit");

  std::array<std::vector<u64>, 3> residues;
  for (std::size_t k = 0; k < 3; ++k) residues[k] = convolve_mod(a, b, len, kPrimes[k]);

  // Garner reconstruction.
  const u64 p0 = kPrimes[0].modulus, p1 = kPrimes[1].modulus, p2 = kPrimes[2].modulus;
  const u64 inv_p0_mod_p1 = power(p0, p1 - 2, p1);
  const u64 inv_p0p1_mod_p2 = power((p0 % p2) * (p1 % p2) % p2, p2 - 2, p2);
  std::vector<u128> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const u64 r0 = residues[0][i], r1 = residues[1][i], r2 = residues[2][i];
    const u64 x1 = (r1 + p1 - r0 % p1) % p1 * inv_p0_mod_p1 % p1;
    const u128 partial = static_cast<u128>(r0) + static_cast<u128>(p0) * x1;  // < p0 p1
    const u64 partial_mod_p2 = static_cast<u64>(partial % p2);
    const u64 x2 = (r2 + p2 - partial_mod_p2) % p2 * inv_p0p1_mod_p2 % p2;
    out[i] = partial + static_cast<u128>(p0) * p1 * x2;
  }
  return out;
}

}  // namespace trisq::detail
