#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "pp/builders.hpp"

namespace pp {

namespace {

constexpr std::uint64_t kConvertLimit = 1u << 16;

class NegatedModel final : public ProtocolModel {
 public:
  explicit NegatedModel(Protocol inner) : inner_(std::move(inner)) {}

  const Protocol& inner() const { return inner_; }

  std::string name() const override { return "negate(" + inner_.name() + ")"; }
  std::uint64_t state_count() const override { return inner_.state_count(); }
  std::string state_name(StateId s) const override { return inner_.state_name(s); }
  std::optional<StateId> find_state(std::string_view name) const override { return inner_.find_state(name); }
  std::vector<StateId> initial_states() const override { return inner_.initial_states(); }
  OutputKind output_kind() const override { return OutputKind::Consensus; }
  Opinion opinion(StateId s) const override {
    return inner_.opinion(s) == Opinion::Accept ? Opinion::Reject : Opinion::Accept;
  }
  void rules(StateId p, StateId q, bool include_silent, std::vector<Transition>& out) const override {
    inner_.model().rules(p, q, include_silent, out);
  }
  const std::vector<Transition>* table() const override { return inner_.table(); }

 private:
  Protocol inner_;
};

class ProductModel final : public ProtocolModel {
 public:
  ProductModel(Protocol left, Protocol right, BoolOp op)
      : left_(std::move(left)), right_(std::move(right)), op_(op), n2_(right_.state_count()) {
    if (left_.state_count() != 0 && n2_ > std::numeric_limits<std::uint64_t>::max() / left_.state_count()) {
      throw std::overflow_error("product state space does not fit in 64-bit ids");
    }
  }

  const Protocol& left() const { return left_; }
  const Protocol& right() const { return right_; }
  BoolOp op() const { return op_; }

  StateId compose(StateId a, StateId b) const { return state(index(a) * n2_ + index(b)); }
  StateId first(StateId s) const { return state(index(s) / n2_); }
  StateId second(StateId s) const { return state(index(s) % n2_); }

  std::string name() const override {
    return std::string(op_ == BoolOp::And ? "and(" : "or(") + left_.name() + "," + right_.name() + ")";
  }
  std::uint64_t state_count() const override { return left_.state_count() * n2_; }
  std::string state_name(StateId s) const override {
    return "(" + left_.state_name(first(s)) + "," + right_.state_name(second(s)) + ")";
  }
  std::optional<StateId> find_state(std::string_view name) const override {
    if (name.size() < 5 || name.front() != '(' || name.back() != ')') return std::nullopt;
    auto body = name.substr(1, name.size() - 2);
    for (auto pos = body.find(','); pos != std::string_view::npos; pos = body.find(',', pos + 1)) {
      auto a = left_.find_state(body.substr(0, pos));
      if (!a) continue;
      if (auto b = right_.find_state(body.substr(pos + 1))) return compose(*a, *b);
    }
    return std::nullopt;
  }
  std::vector<StateId> initial_states() const override { return initial_; }
  OutputKind output_kind() const override { return OutputKind::Consensus; }
  Opinion opinion(StateId s) const override {
    const bool a = left_.opinion(first(s)) == Opinion::Accept;
    const bool b = right_.opinion(second(s)) == Opinion::Accept;
    return (op_ == BoolOp::And ? (a && b) : (a || b)) ? Opinion::Accept : Opinion::Reject;
  }

  void rules(StateId p, StateId q, bool include_silent, std::vector<Transition>& out) const override {
    auto l = component_rules(left_, first(p), first(q));
    auto r = component_rules(right_, second(p), second(q));
    const auto start = out.size();
    for (const auto& a : l) {
      for (const auto& b : r) {
        Transition t{p, q, compose(a.p_out, b.p_out), compose(a.q_out, b.q_out), kNoTransitionId};
        if (!include_silent && t.silent()) continue;
        bool dup = false;
        for (auto i = start; i < out.size() && !dup; ++i) dup = out[i].same_rule(t);
        if (!dup) out.push_back(t);
      }
    }
  }

  void set_initial(std::vector<StateId> initial) { initial_ = std::move(initial); }

 private:
  // every rule of the component for the pair, plus the idle partner
  static std::vector<Transition> component_rules(const Protocol& c, StateId p, StateId q) {
    std::vector<Transition> rules;
    c.model().rules(p, q, true, rules);
    Transition idle{p, q, p, q, kNoTransitionId};
    if (std::none_of(rules.begin(), rules.end(), [&](const Transition& t) { return t.same_rule(idle); })) {
      rules.push_back(idle);
    }
    return rules;
  }

  Protocol left_;
  Protocol right_;
  BoolOp op_;
  std::uint64_t n2_;
  std::vector<StateId> initial_;
};

}  // namespace

std::optional<Composition> composition_of(const Protocol& p) {
  if (!p) return std::nullopt;
  if (const auto* neg = dynamic_cast<const NegatedModel*>(&p.model())) {
    Composition c;
    c.left = neg->inner();
    return c;
  }
  if (const auto* prod = dynamic_cast<const ProductModel*>(&p.model())) {
    Composition c;
    c.kind = Composition::Kind::Product;
    c.op = prod->op();
    c.left = prod->left();
    c.right = prod->right();
    auto keep = p.model_ptr();  // keeps prod alive
    c.component = [keep, prod](StateId s, int side) { return side == 0 ? prod->first(s) : prod->second(s); };
    return c;
  }
  return std::nullopt;
}

BoundProtocol weak_convert(const BoundProtocol& weak) {
  const Protocol& P = weak.protocol;
  if (P.output_kind() != OutputKind::Weak) {
    throw std::invalid_argument("weak_convert: " + P.name() + " is not a weak protocol");
  }
  const auto n = P.state_count();
  if (n > kConvertLimit) throw std::length_error("weak_convert: too many states in " + P.name());

  TableProtocolBuilder b("weak_convert(" + P.name() + ")");
  // inj(q) and, for neutral q, the positive copy
  std::vector<StateId> neg(n), pos(n);
  std::vector<StateId> pr;
  std::vector<Opinion> op(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    op[i] = P.opinion(state(i));
    const auto name = P.state_name(state(i));
    if (op[i] == Opinion::Neutral) {
      pos[i] = b.add_state("+" + name, Opinion::Accept);
      pr.push_back(state(i));
      neg[i] = b.add_state("-" + name, Opinion::Reject);
      pr.push_back(state(i));
    } else {
      pos[i] = neg[i] = b.add_state(name, op[i]);
      pr.push_back(state(i));
    }
  }
  auto preimage = [&](std::uint64_t i) {
    std::vector<StateId> out{neg[i]};
    if (pos[i] != neg[i]) out.push_back(pos[i]);
    return out;
  };

  std::vector<StateId> inputs;
  for (StateId s : weak.inputs) inputs.push_back(neg[index(s)]);
  for (StateId s : P.initial_states()) b.add_initial(neg[index(s)]);

  // derived
  std::vector<Transition> rules;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = i; j < n; ++j) {
      rules.clear();
      P.rules(state(i), state(j), rules);
      for (const auto& t : rules) {
        for (StateId p : preimage(index(t.p))) {
          for (StateId q : preimage(index(t.q))) {
            b.add_transition(p, q, neg[index(t.p_out)], neg[index(t.q_out)]);
          }
        }
      }
    }
  }
  for (std::uint64_t e = 0; e < n; ++e) {
    if (op[e] != Opinion::Neutral) continue;
    for (std::uint64_t v = 0; v < n; ++v) {
      if (op[v] == Opinion::Accept) b.add_transition(pos[v], neg[e], pos[v], pos[e]);  // witnessPos
      if (op[v] == Opinion::Reject) b.add_transition(neg[v], pos[e], neg[v], neg[e]);  // witnessNeg
      if (op[v] == Opinion::Neutral) b.add_transition(neg[e], pos[v], neg[e], neg[v]);  // convince
    }
  }

  BoundProtocol out{std::move(b).build(), weak.predicate, inputs, {}};
  auto project = [pr](const Transition& t) {
    return Transition{pr[index(t.p)], pr[index(t.q)], pr[index(t.p_out)], pr[index(t.q_out)], kNoTransitionId};
  };
  for (const auto& inv : weak.invariants) out.invariants.push_back(lift(inv, "", project));
  out.invariants.push_back({"projects to a move of " + P.name(), [P, project](const Transition& t) {
                              auto image = project(t);
                              return image.silent() || is_rule(P, image);
                            }});
  return out;
}

BoundProtocol negate(const BoundProtocol& p) {
  if (p.protocol.output_kind() != OutputKind::Consensus) {
    throw std::invalid_argument("negate: " + p.protocol.name() + " is a weak protocol");
  }
  Predicate pred = p.predicate.kind() == Predicate::Kind::Not ? p.predicate.left()
                                                               : Predicate::negation(p.predicate);
  if (const auto* neg = dynamic_cast<const NegatedModel*>(&p.protocol.model())) {
    return BoundProtocol{neg->inner(), pred, p.inputs, p.invariants};
  }
  return BoundProtocol{Protocol(std::make_shared<NegatedModel>(p.protocol)), pred, p.inputs, p.invariants};
}

BoundProtocol product(const BoundProtocol& left, const BoundProtocol& right, BoolOp op) {
  for (const auto* side : {&left, &right}) {
    if (side->protocol.output_kind() != OutputKind::Consensus) {
      throw std::invalid_argument("product: " + side->protocol.name() + " is a weak protocol");
    }
  }
  Predicate pred = op == BoolOp::And ? Predicate::conjunction(left.predicate, right.predicate)
                                     : Predicate::disjunction(left.predicate, right.predicate);
  auto model = std::make_shared<ProductModel>(left.protocol, right.protocol, op);
  auto input_of = [](const BoundProtocol& side, const std::string& var) {
    const auto& vars = side.predicate.variables();
    auto it = std::find(vars.begin(), vars.end(), var);
    if (it == vars.end()) {
      throw std::invalid_argument("product: variable " + var + " is not an input of " + side.protocol.name());
    }
    return side.inputs[static_cast<std::size_t>(it - vars.begin())];
  };
  std::vector<StateId> inputs;
  for (const auto& var : pred.variables()) inputs.push_back(model->compose(input_of(left, var), input_of(right, var)));
  model->set_initial(inputs);

  BoundProtocol out{Protocol(model), pred, inputs, {}};
  const auto* m = model.get();
  auto keep = model;  // the lambdas below hold the model alive
  for (const auto& inv : left.invariants) {
    out.invariants.push_back(lift(inv, "left: ", [keep, m](const Transition& t) {
      return Transition{m->first(t.p), m->first(t.q), m->first(t.p_out), m->first(t.q_out), kNoTransitionId};
    }));
  }
  for (const auto& inv : right.invariants) {
    out.invariants.push_back(lift(inv, "right: ", [keep, m](const Transition& t) {
      return Transition{m->second(t.p), m->second(t.q), m->second(t.p_out), m->second(t.q_out), kNoTransitionId};
    }));
  }
  return out;
}

BoundProtocol build_threshold(Terms terms, std::int64_t t) {
  if (terms.empty()) throw std::invalid_argument("threshold: no coefficients");
  for (const auto& [name, a] : terms) {
    if (a == 0) throw std::invalid_argument("threshold: coefficient of " + name + " is zero");
  }
  if (std::all_of(terms.begin(), terms.end(), [](const auto& term) { return term.second > 0; })) {
    return build_inhom_tower(std::move(terms), t);
  }
  if (t >= 1) return weak_convert(build_inhom_tower_cancel(std::move(terms), t));
  // sum a_i x_i >= t  <=>  not(sum (-a_i) x_i >= -t + 1)
  Terms flipped;
  for (const auto& [name, a] : terms) flipped.emplace_back(name, -a);
  if (std::all_of(flipped.begin(), flipped.end(), [](const auto& term) { return term.second > 0; })) {
    return negate(build_inhom_tower(std::move(flipped), -t + 1));
  }
  return negate(weak_convert(build_inhom_tower_cancel(std::move(flipped), -t + 1)));
}

}  // namespace pp
