#pragma once

#include <cstddef>
#include <vector>

namespace trisq::detail {

using u128 = unsigned __int128;

/// Largest transform length supported by all three NTT primes.
inline constexpr std::size_t kMaxTransform = std::size_t{1} << 23;

/// Exact cyclic convolution of two equal-length nonnegative vectors, indices taken
/// modulo their common length. Entries of the result must stay below ~2^89
/// (product of the three NTT primes). Any length m with 2m <= kMaxTransform
/// (or a power of two up to kMaxTransform) is accepted.
std::vector<u128> cyclic_convolution(const std::vector<u128>& a, const std::vector<u128>& b);

}  // namespace trisq::detail
