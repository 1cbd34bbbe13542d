#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace trisq {

/// Fixed-size bitset over [0, size) with word-level shift/or, used by the
/// representation sieves.
class BitTable {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitTable() = default;
  explicit BitTable(std::size_t size) : size_(size), words_((size + kWordBits - 1) / kWordBits, 0) {}

  std::size_t size() const { return size_; }
  std::size_t word_count() const { return words_.size(); }
  const std::vector<Word>& words() const { return words_; }
  std::vector<Word>& words() { return words_; }

  bool test(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i) { words_[i / kWordBits] |= Word{1} << (i % kWordBits); }

  std::size_t count() const {
    std::size_t c = 0;
    for (Word w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  /// this[i] |= source[i - shift] for word indices [word_lo, word_hi).
  void or_shifted(const BitTable& source, std::size_t shift, std::size_t word_lo, std::size_t word_hi) {
    const std::size_t ws = shift / kWordBits;
    const unsigned bs = static_cast<unsigned>(shift % kWordBits);
    const auto& src = source.words_;
    if (word_hi > words_.size()) word_hi = words_.size();
    std::size_t w = word_lo < ws ? ws : word_lo;
    if (bs == 0) {
      for (; w < word_hi; ++w) words_[w] |= src[w - ws];
    } else {
      if (w == ws && w < word_hi) {
        words_[w] |= src[0] << bs;
        ++w;
      }
      for (; w < word_hi; ++w) words_[w] |= (src[w - ws] << bs) | (src[w - ws - 1] >> (kWordBits - bs));
    }
  }

  /// Clears the unused high bits of the last word.
  void trim() {
    const std::size_t tail = size_ % kWordBits;
    if (tail != 0 && !words_.empty()) words_.back() &= (Word{1} << tail) - 1;
  }

  std::optional<std::size_t> first_clear(std::size_t from) const {
    for (std::size_t w = from / kWordBits; w < words_.size(); ++w) {
      Word inv = ~words_[w];
      if (w == from / kWordBits) inv &= ~Word{0} << (from % kWordBits);
      if (inv != 0) {
        std::size_t i = w * kWordBits + static_cast<std::size_t>(std::countr_zero(inv));
        if (i < size_) return i;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  bool operator==(const BitTable&) const = default;

 private:
  std::size_t size_ = 0;
  std::vector<Word> words_;
};

}  // namespace trisq
