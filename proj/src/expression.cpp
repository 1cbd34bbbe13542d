#include "trisq/expression.hpp"

#include <cctype>
#include <limits>
#include <vector>

namespace trisq {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::invalid_argument(message + " at position " + std::to_string(position)), position_(position) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolygonalSum parse() {
    skip_space();
    if (peek() == '0') {
      const std::size_t at = pos_;
      ++pos_;
      skip_space();
      if (done()) return PolygonalSum{};
      pos_ = at;
    }
    std::vector<Term> terms;
    terms.push_back(term());
    skip_space();
    while (!done()) {
      expect('+');
      terms.push_back(term());
      skip_space();
    }
    return PolygonalSum(std::move(terms));
  }

 private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    if (done()) throw ParseError(what + ", found end of input", pos_);
    throw ParseError(what + ", found '" + std::string(1, text_[pos_]) + "'", pos_);
  }

  Integer number() {
    skip_space();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected digits");
    Integer value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      const int d = text_[pos_] - '0';
      if (value > (std::numeric_limits<Integer>::max() - d) / 10) throw ParseError("number too large", pos_);
      value = value * 10 + d;
      ++pos_;
    }
    return value;
  }

  Term term() {
    skip_space();
    const std::size_t start = pos_;
    Integer coefficient = 1;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      coefficient = number();
      skip_space();
      if (peek() == '*') ++pos_;
    }
    if (coefficient == 0) throw ParseError("coefficient must be positive", start);
    expect('P');
    const std::size_t order_at = pos_;
    const Integer order = number();
    if (order < 3) throw ParseError("polygonal order below 3", order_at);
    if (order > 1'000'000) throw ParseError("polygonal order too large", order_at);
    return Term{coefficient, static_cast<int>(order)};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PolygonalSum parse_sum(std::string_view text) { return Parser(text).parse(); }

}  // namespace trisq
