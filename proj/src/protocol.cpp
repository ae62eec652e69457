#include "pp/protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace pp {

namespace {

std::uint64_t pair_key(StateId p, StateId q, std::uint64_t n) {
  auto a = index(p), b = index(q);
  if (a > b) std::swap(a, b);
  return a * n + b;
}

// same effect on configurations: equal pre and post multisets
bool same_effect(const Transition& a, const Transition& b) {
  auto sorted = [](StateId x, StateId y) { return x < y ? std::pair{x, y} : std::pair{y, x}; };
  return sorted(a.p, a.q) == sorted(b.p, b.q) && sorted(a.p_out, a.q_out) == sorted(b.p_out, b.q_out);
}

class TableModel final : public ProtocolModel {
 public:
  TableModel(std::string name, OutputKind kind, std::vector<std::string> names,
             std::unordered_map<std::string, StateId> by_name, std::vector<Opinion> opinions,
             std::vector<StateId> initial, std::vector<Transition> transitions,
             std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_pair)
      : name_(std::move(name)),
        kind_(kind),
        names_(std::move(names)),
        by_name_(std::move(by_name)),
        opinions_(std::move(opinions)),
        initial_(std::move(initial)),
        transitions_(std::move(transitions)),
        by_pair_(std::move(by_pair)) {}

  std::string name() const override { return name_; }
  std::uint64_t state_count() const override { return names_.size(); }
  std::string state_name(StateId s) const override { return names_.at(index(s)); }
  std::optional<StateId> find_state(std::string_view name) const override {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  std::vector<StateId> initial_states() const override { return initial_; }
  OutputKind output_kind() const override { return kind_; }
  Opinion opinion(StateId s) const override { return opinions_.at(index(s)); }

  void rules(StateId p, StateId q, bool include_silent, std::vector<Transition>& out) const override {
    auto it = by_pair_.find(pair_key(p, q, names_.size()));
    if (it == by_pair_.end()) return;
    for (auto i : it->second) {
      const Transition& t = transitions_[i];
      if (!include_silent && t.silent()) continue;
      if (t.p == p && t.q == q) {
        out.push_back(t);
        if (p == q && t.p_out != t.q_out) out.push_back(t.mirrored());
      } else {
        out.push_back(t.mirrored());
      }
    }
  }

  const std::vector<Transition>* table() const override { return &transitions_; }

 private:
  std::string name_;
  OutputKind kind_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, StateId> by_name_;
  std::vector<Opinion> opinions_;
  std::vector<StateId> initial_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_pair_;
};

}  // namespace

bool Transition::silent() const noexcept {
  return (p == p_out && q == q_out) || (p == q_out && q == p_out);
}

Configuration Transition::pre() const { return Configuration{{p, 1}, {q, 1}}; }
Configuration Transition::post() const { return Configuration{{p_out, 1}, {q_out, 1}}; }

Protocol::Protocol(std::shared_ptr<const ProtocolModel> model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("protocol model is null");
  name_ = model_->name();
  state_count_ = model_->state_count();
  kind_ = model_->output_kind();
  initial_ = model_->initial_states();
  std::sort(initial_.begin(), initial_.end());
  initial_.erase(std::unique(initial_.begin(), initial_.end()), initial_.end());
}

std::string Protocol::state_name(StateId s) const {
  if (!contains(s)) throw std::out_of_range("state #" + std::to_string(index(s)) + " is not in " + name_);
  return model_->state_name(s);
}

StateId Protocol::state_named(std::string_view name) const {
  if (auto s = model_->find_state(name)) return *s;
  throw std::invalid_argument("unknown state '" + std::string(name) + "' in " + name_);
}

bool Protocol::is_initial(StateId s) const noexcept {
  return std::binary_search(initial_.begin(), initial_.end(), s);
}

std::vector<Transition> Protocol::transitions_for(StateId p, StateId q, bool include_silent) const {
  std::vector<Transition> out;
  model_->rules(p, q, true, out);
  if (out.empty()) {
    if (include_silent) out.push_back(Transition{p, q, p, q, kNoTransitionId});
    return out;
  }
  if (!include_silent) std::erase_if(out, [](const Transition& t) { return t.silent(); });
  return out;
}

// -- builder -----------------------------------------------------------------

TableProtocolBuilder::TableProtocolBuilder(std::string name, OutputKind kind)
    : name_(std::move(name)), kind_(kind) {}

StateId TableProtocolBuilder::add_state(std::string name, Opinion opinion) {
  if (by_name_.contains(name)) throw std::invalid_argument("duplicate state name '" + name + "'");
  if (kind_ == OutputKind::Consensus && opinion == Opinion::Neutral) {
    throw std::invalid_argument("consensus protocol cannot have neutral state '" + name + "'");
  }
  StateId id = state(names_.size());
  by_name_.emplace(name, id);
  names_.push_back(std::move(name));
  opinions_.push_back(opinion);
  return id;
}

std::optional<StateId> TableProtocolBuilder::find_state(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

StateId TableProtocolBuilder::state_named(std::string_view name) const {
  if (auto s = find_state(name)) return *s;
  throw std::invalid_argument("unknown state '" + std::string(name) + "'");
}

void TableProtocolBuilder::add_initial(StateId s) {
  if (index(s) >= names_.size()) throw std::invalid_argument("initial state out of range");
  if (std::find(initial_.begin(), initial_.end(), s) == initial_.end()) initial_.push_back(s);
}

bool TableProtocolBuilder::add_transition(StateId p, StateId q, StateId p_out, StateId q_out) {
  const auto n = names_.size();
  for (StateId s : {p, q, p_out, q_out}) {
    if (index(s) >= n) throw std::invalid_argument("transition endpoint out of range");
  }
  Transition t{p, q, p_out, q_out, transitions_.size()};
  auto& bucket = by_pair_[pair_key(p, q, n)];
  for (auto i : bucket) {
    const Transition& o = transitions_[i];
    if (o.same_rule(t) || o.same_rule(t.mirrored())) return false;
    if (p == q && o.same_rule(Transition{p, q, q_out, p_out})) return false;
  }
  bucket.push_back(static_cast<std::uint32_t>(transitions_.size()));
  transitions_.push_back(t);
  return true;
}

Protocol TableProtocolBuilder::build() && {
  return Protocol(std::make_shared<TableModel>(std::move(name_), kind_, std::move(names_), std::move(by_name_),
                                               std::move(opinions_), std::move(initial_), std::move(transitions_),
                                               std::move(by_pair_)));
}

// -- audit -------------------------------------------------------------------

std::vector<std::string> audit(const Protocol& p) {
  std::vector<std::string> problems;
  if (!p) {
    problems.emplace_back("protocol is empty");
    return problems;
  }
  const auto n = p.state_count();
  if (n == 0) problems.emplace_back("state set is empty");
  for (StateId s : p.initial_states()) {
    if (!p.contains(s)) problems.push_back("initial state #" + std::to_string(index(s)) + " outside Q");
  }
  // per-state checks are only affordable on modest state spaces
  constexpr std::uint64_t kScanLimit = 1u << 20;
  if (n <= kScanLimit) {
    std::unordered_set<std::string> seen;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto name = p.state_name(state(i));
      if (!seen.insert(name).second) problems.push_back("duplicate state name '" + name + "'");
      if (p.output_kind() == OutputKind::Consensus && p.opinion(state(i)) == Opinion::Neutral) {
        problems.push_back("consensus protocol has neutral state '" + name + "'");
      }
    }
  }
  if (const auto* table = p.table()) {
    for (const auto& t : *table) {
      for (StateId s : {t.p, t.q, t.p_out, t.q_out}) {
        if (!p.contains(s)) {
          problems.push_back("transition " + std::to_string(t.id) + " has endpoint outside Q");
          break;
        }
      }
    }
  }
  return problems;
}

// -- semantics ---------------------------------------------------------------

Decision output_of(const Protocol& p, const Configuration& c) {
  bool accept = false, reject = false;
  for (const auto& e : c.entries()) {
    if (!p.contains(e.state)) {
      throw std::out_of_range("configuration references state #" + std::to_string(index(e.state)) +
                              " outside " + p.name());
    }
    switch (p.opinion(e.state)) {
      case Opinion::Accept: accept = true; break;
      case Opinion::Reject: reject = true; break;
      case Opinion::Neutral: break;
    }
  }
  if (accept && reject) return Decision::Undecided;
  return accept ? Decision::Accept : Decision::Reject;
}

std::vector<Transition> enabled_transitions(const Protocol& p, const Configuration& c, bool include_silent) {
  std::vector<Transition> out;
  const auto entries = c.entries();
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a; b < entries.size(); ++b) {
      if (a == b && entries[a].count < 2) continue;
      auto rules = p.transitions_for(entries[a].state, entries[b].state, include_silent);
      const auto first = out.size();
      for (const auto& t : rules) {
        bool dup = false;
        for (std::size_t i = first; i < out.size() && !dup; ++i) {
          dup = out[i].id == t.id && same_effect(out[i], t);
        }
        if (!dup) out.push_back(t);
      }
    }
  }
  return out;
}

Configuration apply_move(const Configuration& c, const Transition& t) {
  const bool enabled = t.p == t.q ? c.count(t.p) >= 2 : (c.count(t.p) >= 1 && c.count(t.q) >= 1);
  if (!enabled) throw std::invalid_argument("transition is not enabled in the configuration");
  Configuration d = c;
  d.remove(t.p);
  d.remove(t.q);
  d.add(t.p_out);
  d.add(t.q_out);
  return d;
}

Configuration apply_move(const Protocol& p, const Configuration& c, const Transition& t) {
  if (!is_rule(p, t)) throw std::invalid_argument("transition is not a rule of " + p.name());
  return apply_move(c, t);
}

Configuration apply_snipe(const Configuration& c, StateId q) {
  if (c.count(q) == 0) {
    throw std::invalid_argument("cannot snipe from unoccupied state #" + std::to_string(index(q)));
  }
  Configuration d = c;
  d.remove(q);
  return d;
}

bool is_terminal(const Protocol& p, const Configuration& c) {
  std::vector<Transition> scratch;
  const auto entries = c.entries();
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a; b < entries.size(); ++b) {
      if (a == b && entries[a].count < 2) continue;
      scratch.clear();
      p.rules(entries[a].state, entries[b].state, scratch);
      if (!scratch.empty()) return false;
    }
  }
  return true;
}

bool is_rule(const Protocol& p, const Transition& t) {
  if (!p.contains(t.p) || !p.contains(t.q) || !p.contains(t.p_out) || !p.contains(t.q_out)) return false;
  for (const auto& r : p.transitions_for(t.p, t.q, true)) {
    if (same_effect(r, t)) return true;
  }
  return false;
}

}  // namespace pp
