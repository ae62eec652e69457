#include "pp/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace pp {

struct Predicate::Node {
  Kind kind;
  std::vector<Term> terms;
  std::int64_t t = 0;
  std::int64_t m = 0;
  std::shared_ptr<const Node> left;
  std::shared_ptr<const Node> right;
};

Predicate::Predicate(std::shared_ptr<const Node> root) : root_(std::move(root)) {
  // walk the tree collecting names in order of first appearance
  std::vector<const Node*> stack{root_.get()};
  std::vector<const Node*> order;
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    if (n->right) stack.push_back(n->right.get());
    if (n->left) stack.push_back(n->left.get());
  }
  for (const Node* n : order) {
    for (const auto& [name, a] : n->terms) {
      if (std::find(vars_.begin(), vars_.end(), name) == vars_.end()) vars_.push_back(name);
    }
  }
}

namespace {

std::vector<Predicate::Term> merge_terms(std::vector<Predicate::Term> terms) {
  std::vector<Predicate::Term> out;
  for (auto& [name, a] : terms) {
    if (name.empty()) throw std::invalid_argument("predicate variable name is empty");
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == name; });
    if (it == out.end()) {
      out.emplace_back(std::move(name), a);
    } else {
      it->second += a;
    }
  }
  return out;
}

}  // namespace

Predicate Predicate::threshold(std::vector<Term> terms, std::int64_t t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Threshold;
  n->terms = merge_terms(std::move(terms));
  n->t = t;
  return Predicate(std::move(n));
}

Predicate Predicate::modulo(std::vector<Term> terms, std::int64_t m, std::int64_t t) {
  if (m <= 0) throw std::invalid_argument("modulus must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Modulo;
  n->terms = merge_terms(std::move(terms));
  n->m = m;
  n->t = t;
  return Predicate(std::move(n));
}

Predicate Predicate::negation(Predicate inner) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->left = inner.root_;
  return Predicate(std::move(n));
}

Predicate Predicate::conjunction(Predicate left, Predicate right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->left = left.root_;
  n->right = right.root_;
  return Predicate(std::move(n));
}

Predicate Predicate::disjunction(Predicate left, Predicate right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->left = left.root_;
  n->right = right.root_;
  return Predicate(std::move(n));
}

Predicate::Kind Predicate::kind() const noexcept { return root_->kind; }

const std::vector<Predicate::Term>& Predicate::terms() const {
  if (root_->kind != Kind::Threshold && root_->kind != Kind::Modulo) {
    throw std::logic_error("predicate node has no terms");
  }
  return root_->terms;
}

std::int64_t Predicate::bound() const {
  (void)terms();
  return root_->t;
}

std::int64_t Predicate::modulus() const {
  if (root_->kind != Kind::Modulo) throw std::logic_error("predicate node is not a modulo predicate");
  return root_->m;
}

Predicate Predicate::left() const {
  if (!root_->left) throw std::logic_error("predicate node has no children");
  return Predicate(root_->left);
}

Predicate Predicate::right() const {
  if (!root_->right) throw std::logic_error("predicate node has no right child");
  return Predicate(root_->right);
}

namespace {

std::int64_t weighted_sum(const std::vector<Predicate::Term>& terms, const std::vector<std::string>& vars,
                          std::span<const std::int64_t> x) {
  std::int64_t sum = 0;
  for (const auto& [name, a] : terms) {
    auto i = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), name) - vars.begin());
    sum += a * x[i];
  }
  return sum;
}

bool eval_node(const Predicate::Node& n, const std::vector<std::string>& vars,
               std::span<const std::int64_t> x) {
  switch (n.kind) {
    case Predicate::Kind::Threshold: return weighted_sum(n.terms, vars, x) >= n.t;
    case Predicate::Kind::Modulo: {
      auto r = weighted_sum(n.terms, vars, x) % n.m;
      if (r < 0) r += n.m;
      return r >= n.t;
    }
    case Predicate::Kind::Not: return !eval_node(*n.left, vars, x);
    case Predicate::Kind::And: return eval_node(*n.left, vars, x) && eval_node(*n.right, vars, x);
    case Predicate::Kind::Or: return eval_node(*n.left, vars, x) || eval_node(*n.right, vars, x);
  }
  return false;
}

void print_sum(const std::vector<Predicate::Term>& terms, std::string& out) {
  out += "(+";
  for (const auto& [name, a] : terms) {
    out += ' ';
    if (a == 1) {
      out += name;
    } else {
      out += "(* " + std::to_string(a) + ' ' + name + ')';
    }
  }
  out += ')';
}

void print_node(const Predicate::Node& n, std::string& out) {
  switch (n.kind) {
    case Predicate::Kind::Threshold:
      out += "(>= ";
      print_sum(n.terms, out);
      out += ' ' + std::to_string(n.t) + ')';
      return;
    case Predicate::Kind::Modulo:
      out += "(>= (mod ";
      print_sum(n.terms, out);
      out += ' ' + std::to_string(n.m) + ") " + std::to_string(n.t) + ')';
      return;
    case Predicate::Kind::Not:
      out += "(not ";
      print_node(*n.left, out);
      out += ')';
      return;
    case Predicate::Kind::And:
    case Predicate::Kind::Or:
      out += n.kind == Predicate::Kind::And ? "(and " : "(or ";
      print_node(*n.left, out);
      out += ' ';
      print_node(*n.right, out);
      out += ')';
      return;
  }
}

}  // namespace

bool Predicate::eval(std::span<const std::int64_t> x) const {
  if (x.size() != vars_.size()) {
    throw std::invalid_argument("predicate expects " + std::to_string(vars_.size()) + " inputs, got " +
                                std::to_string(x.size()));
  }
  for (auto v : x) {
    if (v < 0) throw std::invalid_argument("predicate inputs must be non-negative");
  }
  return eval_node(*root_, vars_, x);
}

std::string Predicate::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

// -- parser ------------------------------------------------------------------

namespace {

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  Predicate parse_all() {
    Predicate p = parse_formula();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("predicate parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string_view atom() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected an atom");
    return text_.substr(start, pos_ - start);
  }

  std::int64_t integer() {
    auto a = atom();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
    if (ec != std::errc{} || ptr != a.data() + a.size()) fail("expected an integer, got '" + std::string(a) + "'");
    return v;
  }

  Predicate::Term term() {
    if (peek('(')) {
      expect('(');
      if (atom() != "*") fail("expected '*'");
      auto a = integer();
      auto name = std::string(atom());
      expect(')');
      return {name, a};
    }
    return {std::string(atom()), 1};
  }

  std::vector<Predicate::Term> sum() {
    expect('(');
    if (atom() != "+") fail("expected '+'");
    std::vector<Predicate::Term> terms;
    while (!peek(')')) terms.push_back(term());
    expect(')');
    return terms;
  }

  Predicate parse_formula() {
    expect('(');
    auto head = atom();
    if (head == "not") {
      auto inner = parse_formula();
      expect(')');
      return Predicate::negation(std::move(inner));
    }
    if (head == "and" || head == "or") {
      auto l = parse_formula();
      auto r = parse_formula();
      expect(')');
      return head == "and" ? Predicate::conjunction(std::move(l), std::move(r))
                           : Predicate::disjunction(std::move(l), std::move(r));
    }
    if (head != ">=") fail("unknown operator '" + std::string(head) + "'");
    // either (+ ...) or (mod (+ ...) m)
    expect('(');
    const auto save = pos_;
    auto op = atom();
    if (op == "mod") {
      auto terms = sum();
      auto m = integer();
      expect(')');
      auto t = integer();
      expect(')');
      return Predicate::modulo(std::move(terms), m, t);
    }
    pos_ = save - 1;
    auto terms = sum();
    auto t = integer();
    expect(')');
    return Predicate::threshold(std::move(terms), t);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Predicate Predicate::parse(std::string_view text) { return SexprParser(text).parse_all(); }

}  // namespace pp
