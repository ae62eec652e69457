#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pp/configuration.hpp"
#include "pp/types.hpp"

namespace pp {

/// A pairwise rule p, q -> p_out, q_out.
///
/// The orientation is agent-wise: the agent in p ends in p_out. Semantics on
/// configurations only see the multisets pre = <p, q> and post = <p_out, q_out>.
struct Transition {
  StateId p{};
  StateId q{};
  StateId p_out{};
  StateId q_out{};
  TransitionId id = kNoTransitionId;

  /// pre(t) == post(t) as multisets.
  bool silent() const noexcept;
  Transition mirrored() const noexcept { return Transition{q, p, q_out, p_out, id}; }
  Configuration pre() const;
  Configuration post() const;

  /// Equality of the oriented rule, ignoring the id.
  bool same_rule(const Transition& o) const noexcept {
    return p == o.p && q == o.q && p_out == o.p_out && q_out == o.q_out;
  }
};

/// Backing implementation of a protocol. Implementations are immutable and
/// safe to query from several threads.
class ProtocolModel {
 public:
  virtual ~ProtocolModel() = default;

  virtual std::string name() const = 0;
  virtual std::uint64_t state_count() const = 0;
  virtual std::string state_name(StateId s) const = 0;
  virtual std::optional<StateId> find_state(std::string_view name) const = 0;
  virtual std::vector<StateId> initial_states() const = 0;
  virtual OutputKind output_kind() const = 0;
  virtual Opinion opinion(StateId s) const = 0;

  /// Appends every rule with preset <p, q>, oriented so that t.p == p and
  /// t.q == q. When p == q both agent orientations are reported. Silent
  /// rules are only reported when include_silent is set; the identity for
  /// uncovered pairs is synthesized by Protocol, not here.
  virtual void rules(StateId p, StateId q, bool include_silent,
                     std::vector<Transition>& out) const = 0;

  /// Explicit transition table, if the protocol has one.
  virtual const std::vector<Transition>* table() const { return nullptr; }
};

/// Generalized protocol (Q, delta, I, O) with a partition-based output scheme.
///
/// Cheap to copy; copies share the immutable model.
class Protocol {
 public:
  Protocol() = default;
  explicit Protocol(std::shared_ptr<const ProtocolModel> model);

  const std::string& name() const noexcept { return name_; }
  std::uint64_t state_count() const noexcept { return state_count_; }
  bool contains(StateId s) const noexcept { return index(s) < state_count_; }
  std::string state_name(StateId s) const;
  std::optional<StateId> find_state(std::string_view name) const { return model_->find_state(name); }
  /// Like find_state but throws std::invalid_argument naming the unknown state.
  StateId state_named(std::string_view name) const;

  const std::vector<StateId>& initial_states() const noexcept { return initial_; }
  bool is_initial(StateId s) const noexcept;
  OutputKind output_kind() const noexcept { return kind_; }
  Opinion opinion(StateId s) const { return model_->opinion(s); }

  /// Non-silent rules for the pair, oriented with p first.
  void rules(StateId p, StateId q, std::vector<Transition>& out) const {
    model_->rules(p, q, false, out);
  }
  /// All rules for the pair including silent ones; if the pair is not
  /// covered by any rule the identity transition is synthesized.
  std::vector<Transition> transitions_for(StateId p, StateId q, bool include_silent) const;

  const std::vector<Transition>* table() const { return model_->table(); }
  const ProtocolModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const ProtocolModel>& model_ptr() const noexcept { return model_; }
  explicit operator bool() const noexcept { return static_cast<bool>(model_); }

 private:
  std::shared_ptr<const ProtocolModel> model_;
  std::string name_;
  std::uint64_t state_count_ = 0;
  OutputKind kind_ = OutputKind::Consensus;
  std::vector<StateId> initial_;
};

/// Incrementally assembles an explicit (table-backed) protocol.
class TableProtocolBuilder {
 public:
  explicit TableProtocolBuilder(std::string name, OutputKind kind = OutputKind::Consensus);

  /// Throws std::invalid_argument on a duplicate name or on a neutral state
  /// in a consensus protocol.
  StateId add_state(std::string name, Opinion opinion);
  std::optional<StateId> find_state(std::string_view name) const;
  StateId state_named(std::string_view name) const;
  std::size_t state_count() const noexcept { return names_.size(); }

  void add_initial(StateId s);
  /// Adds p, q -> p_out, q_out unless the same rule (up to mirroring) exists.
  /// Returns false for duplicates.
  bool add_transition(StateId p, StateId q, StateId p_out, StateId q_out);

  Protocol build() &&;

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

/// Structural audit: initial states in Q, consensus schemes without neutral
/// states, table endpoints in Q, unique state names. Returns problems found.
std::vector<std::string> audit(const Protocol& p);

// -- single-step semantics ---------------------------------------------------

/// Consensus / weak-consensus output. The empty configuration is Reject.
/// Throws std::out_of_range for states outside the protocol.
Decision output_of(const Protocol& p, const Configuration& c);

/// Transitions t with pre(t) <= C, one orientation per rule. When
/// include_silent is false only rules whose effect changes C are kept.
std::vector<Transition> enabled_transitions(const Protocol& p, const Configuration& c,
                                            bool include_silent = true);

/// C - pre(t) + post(t). Throws std::invalid_argument if t is not enabled.
Configuration apply_move(const Configuration& c, const Transition& t);
/// As above, additionally rejecting transitions that are not rules of p.
Configuration apply_move(const Protocol& p, const Configuration& c, const Transition& t);

/// Removes one agent from q. Throws std::invalid_argument if q is unoccupied.
Configuration apply_snipe(const Configuration& c, StateId q);

/// True iff every enabled transition is silent.
bool is_terminal(const Protocol& p, const Configuration& c);

/// Whether t (in either orientation) is one of the protocol's rules,
/// including the synthesized identities.
bool is_rule(const Protocol& p, const Transition& t);

/// Calls f(t, successor) for every non-silent enabled rule. The successor
/// may repeat across rules.
template <typename F>
void for_each_move(const Protocol& p, const Configuration& c, std::vector<Transition>& scratch, F&& f) {
  const auto entries = c.entries();
  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a; b < entries.size(); ++b) {
      if (a == b && entries[a].count < 2) continue;
      scratch.clear();
      p.rules(entries[a].state, entries[b].state, scratch);
      for (const auto& t : scratch) {
        Configuration d = c;
        d.remove(t.p);
        d.remove(t.q);
        d.add(t.p_out);
        d.add(t.q_out);
        f(t, std::move(d));
      }
    }
  }
}

}  // namespace pp
