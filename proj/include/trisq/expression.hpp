#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "trisq/polygonal.hpp"

namespace trisq {

/// Syntax or range error in a sum expression; `position` is a 0-based offset into the source.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// sum  := term ('+' term)*   |  '0'
/// term := [digits ['*']] 'P' digits
/// Whitespace is ignored. Coefficients must be positive and orders at least 3.
PolygonalSum parse_sum(std::string_view text);

/// Canonical text; parse_sum(format_sum(s)) == s.
inline std::string format_sum(const PolygonalSum& sum) { return sum.to_string(); }

}  // namespace trisq
