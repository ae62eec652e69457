#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pp {

/// Boolean combination of threshold and modulo predicates over named
/// non-negative integer variables.
///
/// Values are immutable. Variables are ordered by first appearance; combining
/// predicates merges variables by name.
class Predicate {
 public:
  enum class Kind { Threshold, Modulo, Not, And, Or };
  using Term = std::pair<std::string, std::int64_t>;

  /// sum(a_i x_i) >= t
  static Predicate threshold(std::vector<Term> terms, std::int64_t t);
  /// sum(a_i x_i) mod m >= t, with the sum reduced into [0, m).
  static Predicate modulo(std::vector<Term> terms, std::int64_t m, std::int64_t t);
  static Predicate negation(Predicate inner);
  static Predicate conjunction(Predicate left, Predicate right);
  static Predicate disjunction(Predicate left, Predicate right);

  /// Parses the s-expression form produced by to_string(). Throws
  /// std::invalid_argument with the offending position.
  static Predicate parse(std::string_view text);

  Kind kind() const noexcept;
  const std::vector<std::string>& variables() const noexcept { return vars_; }
  std::size_t arity() const noexcept { return vars_.size(); }

  /// Leaf accessors (Threshold/Modulo only).
  const std::vector<Term>& terms() const;
  std::int64_t bound() const;
  std::int64_t modulus() const;
  /// Child accessors (Not: left only).
  Predicate left() const;
  Predicate right() const;

  /// x has one entry per variable. Throws std::invalid_argument on a
  /// dimension mismatch or negative entry.
  bool eval(std::span<const std::int64_t> x) const;
  bool eval(std::initializer_list<std::int64_t> x) const {
    return eval(std::span<const std::int64_t>(x.begin(), x.size()));
  }

  std::string to_string() const;

  friend bool operator==(const Predicate& a, const Predicate& b) { return a.to_string() == b.to_string(); }

  struct Node;  // opaque

 private:
  explicit Predicate(std::shared_ptr<const Node> root);

  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

}  // namespace pp
