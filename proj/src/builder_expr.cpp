#include <cctype>
#include <charconv>
#include <stdexcept>
#include <string>

#include "pp/builders.hpp"

namespace pp {

namespace {

// expr    := name '(' args ')'
// coeffs  := coeff (',' coeff)*        coeff := [ident ':'] int
// args per builder: pebbles(t) tower(t) inhom_tower(coeffs;t) gen_majority(coeffs)
//   inhom_tower_cancel(coeffs;t) threshold(coeffs;t) big_modulo(coeffs;m,t)
//   modulo_combined(coeffs;m,t) modulo_combined_small(coeffs;m,t)
//   weak_convert(expr) negate(expr) and(expr,expr) or(expr,expr)
class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  BoundProtocol parse_all() {
    auto p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("builder expression error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::int64_t integer() {
    skip_ws();
    const auto start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::int64_t v = 0;
    const char* first = text_.data() + start + (text_[start] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, text_.data() + pos_, v);
    if (ec != std::errc{} || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("expected an integer");
    }
    return v;
  }

  Terms coefficients() {
    std::vector<std::pair<std::string, std::int64_t>> named;
    std::vector<std::int64_t> plain;
    do {
      skip_ws();
      if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
        auto name = ident();
        expect(':');
        named.emplace_back(std::move(name), integer());
      } else {
        plain.push_back(integer());
      }
    } while (accept(','));
    if (!named.empty() && !plain.empty()) fail("mix of named and unnamed coefficients");
    return named.empty() ? default_terms(plain) : Terms(named.begin(), named.end());
  }

  BoundProtocol expr() {
    const auto at = pos_;
    auto name = ident();
    expect('(');
    BoundProtocol out = dispatch(name, at);
    expect(')');
    return out;
  }

  BoundProtocol dispatch(const std::string& name, std::size_t at) {
    try {
      if (name == "pebbles") return build_pebbles(integer());
      if (name == "tower") return build_tower(integer());
      if (name == "gen_majority") return build_gen_majority(coefficients());
      if (name == "inhom_tower" || name == "inhom_tower_cancel" || name == "threshold") {
        auto terms = coefficients();
        expect(';');
        auto t = integer();
        if (name == "inhom_tower") return build_inhom_tower(std::move(terms), t);
        if (name == "threshold") return build_threshold(std::move(terms), t);
        return build_inhom_tower_cancel(std::move(terms), t);
      }
      if (name == "big_modulo" || name == "modulo_combined" || name == "modulo_combined_small") {
        auto terms = coefficients();
        expect(';');
        auto m = integer();
        expect(',');
        auto t = integer();
        if (name == "big_modulo") return build_big_modulo(std::move(terms), m, t);
        if (name == "modulo_combined") return build_modulo_combined(std::move(terms), m, t);
        return build_modulo_combined_small(std::move(terms), m, t);
      }
      if (name == "weak_convert") return weak_convert(expr());
      if (name == "negate") return negate(expr());
      if (name == "and" || name == "or") {
        auto left = expr();
        expect(',');
        auto right = expr();
        return product(left, right, name == "and" ? BoolOp::And : BoolOp::Or);
      }
    } catch (const std::invalid_argument& e) {
      if (std::string_view(e.what()).starts_with("builder expression error")) throw;
      pos_ = at;
      fail(e.what());
    }
    pos_ = at;
    fail("unknown builder '" + name + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

BoundProtocol build_from_expression(std::string_view expr) { return ExprParser(expr).parse_all(); }

}  // namespace pp
