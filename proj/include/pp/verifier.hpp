#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "pp/builders.hpp"
#include "pp/graph.hpp"
#include "pp/trace.hpp"

namespace pp {

/// Exploration hit the configured node budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// out_0 is Undecided where a decision was required.
class IllSpecified : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// 5'000'000 unless PP_NODE_BUDGET is set.
std::uint64_t default_node_budget();

/// Tolerance of a configuration C.
///
/// `value` is the largest i <= |C| - 1 for which the property holds, so it
/// only speaks about snipe counts that leave at least one agent. `unbounded`
/// records whether the property also survives sniping every agent.
struct Tolerance {
  std::uint64_t value = 0;
  bool unbounded = false;

  friend bool operator==(const Tolerance&, const Tolerance&) = default;
};

/// "unbounded" or the value.
std::string to_string(const Tolerance& t);

struct ExploreOptions {
  std::uint64_t node_budget = default_node_budget();
  /// Checked on every explored move edge when set.
  const std::vector<EdgeInvariant>* invariants = nullptr;
};

struct InvariantTally {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violated = 0;
};

/// Layered reachability: layer k holds the configurations first reached
/// with k snipes, closed under moves. Bottom components are computed per
/// layer, which is sound because no configuration can reach one with more
/// agents.
class SnipeExplorer {
 public:
  SnipeExplorer(Protocol p, Configuration start, ExploreOptions opts = {});
  SnipeExplorer(const SnipeExplorer&) = delete;
  SnipeExplorer& operator=(const SnipeExplorer&) = delete;

  /// Explores one more snipe layer.
  void advance();
  /// Number of explored layers (>= 1).
  std::size_t layers() const noexcept { return layer_out_.size(); }
  /// out_k for k < layers().
  Decision out(std::size_t k) const { return layer_out_.at(k); }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Nodes with at most k snipes.
  std::size_t node_count(std::size_t k) const { return layer_end_.at(k); }
  const Configuration& node(NodeId v) const { return nodes_.at(v); }
  std::uint32_t depth(NodeId v) const { return depth_.at(v); }
  Decision output(NodeId v) const { return label_.at(v); }
  const Adjacency& moves() const noexcept { return adj_; }
  std::optional<NodeId> find(const Configuration& c) const;

  /// A node in a bottom component reached with at most k snipes whose
  /// output differs from `expected`; the least-snipe one is preferred.
  std::optional<NodeId> witness(std::size_t k, Decision expected) const;
  /// Steps from the start configuration to v along discovery edges.
  ExecutionTrace trace_to(NodeId v) const;

  const std::vector<InvariantTally>& invariant_tallies() const noexcept { return tallies_; }
  std::uint64_t invariant_violations() const;

 private:
  struct Hash {
    const std::vector<Configuration>* nodes;
    std::size_t operator()(NodeId v) const { return (*nodes)[v].hash(); }
  };
  struct Eq {
    const std::vector<Configuration>* nodes;
    bool operator()(NodeId a, NodeId b) const { return (*nodes)[a] == (*nodes)[b]; }
  };

  NodeId intern(Configuration c, std::uint32_t depth, NodeId parent, const StepLabel& via);
  void close_under_moves(NodeId from);
  void finish_layer(NodeId first);

  Protocol p_;
  ExploreOptions opts_;
  std::vector<Configuration> nodes_;
  std::unordered_set<NodeId, Hash, Eq> index_;
  std::vector<std::uint32_t> depth_;
  std::vector<NodeId> parent_;
  std::vector<StepLabel> via_;
  std::vector<Decision> label_;
  Adjacency adj_;
  Components comps_;
  std::vector<Decision> comp_value_;
  std::vector<Decision> layer_out_;
  std::vector<NodeId> layer_end_;
  std::vector<InvariantTally> tallies_;
  std::vector<Transition> scratch_;
};

struct ReachabilityGraph {
  std::vector<Configuration> nodes;
  Adjacency edges;  // non-silent moves
  std::vector<Decision> output;
};

/// Closure of the seeds under non-silent moves, in BFS order.
ReachabilityGraph move_closure(const Protocol& p, const std::vector<Configuration>& seeds,
                               const ExploreOptions& opts = {});

Decision out0(const Protocol& p, const Configuration& c, const ExploreOptions& opts = {});

struct LayeredReach {
  std::vector<Configuration> nodes;
  std::vector<std::uint32_t> depth;  // least number of snipes
};

LayeredReach reachable_with_snipes(const Protocol& p, const Configuration& c, std::size_t i,
                                   const ExploreOptions& opts = {});

Decision out_i(const Protocol& p, const Configuration& c, std::size_t i, const ExploreOptions& opts = {});

/// From the predicate over sub-configurations of an initial C. Throws
/// std::invalid_argument if C is not initial.
Tolerance initial_tolerance(const BoundProtocol& bp, const Configuration& c);

/// Same quantity from out_0 of the protocol on every non-empty
/// sub-configuration; the empty one still uses the predicate at 0.
Tolerance initial_tolerance_by_protocol(const BoundProtocol& bp, const Configuration& c,
                                        const ExploreOptions& opts = {});

/// Throws IllSpecified if out_0(C) is Undecided.
Tolerance global_tolerance(const Protocol& p, const Configuration& c, const ExploreOptions& opts = {});

struct ToleranceReport {
  Configuration config;
  std::vector<std::int64_t> input;
  bool expected = false;  // predicate value
  Decision out0 = Decision::Undecided;
  bool well_specified = false;
  Tolerance intol;
  std::optional<Tolerance> tol;  // absent when out0 is Undecided or on error
  bool robust = false;
  std::optional<ExecutionTrace> counterexample;
  std::uint64_t nodes = 0;
  std::vector<InvariantTally> invariants;
  std::string error;  // set when the configuration could not be analysed
};

/// out_0, InTol, Tol and the robustness verdict of one initial configuration.
/// The bound protocol's invariants are checked on every explored edge.
ToleranceReport analyze(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts = {});

/// Exact out_i of a negation or product computed from its components.
/// Every move and snipe of the composite projects onto each component and
/// every component step lifts back, so each bottom component of the
/// composite projects onto bottom components of both sides. Non-composite
/// protocols are explored explicitly. nullopt when the component values do
/// not determine the result (an Or of two undecided sides, say).
std::optional<Decision> composed_out(const Protocol& p, const Configuration& c, std::size_t i,
                                     const ExploreOptions& opts = {});

/// analyze() through composed_out, for products too large to explore
/// whole. Where the components leave out_i open, a sub-configuration of C
/// with a different out_0 still settles it. No counterexample trace and no
/// invariant tallies; `error` says where Tol stayed undetermined.
ToleranceReport analyze_composed(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts = {});

/// Distinct initial configurations with min_agents..max_agents agents.
std::vector<Configuration> initial_configurations(const BoundProtocol& bp, std::uint64_t max_agents,
                                                  std::uint64_t min_agents = 1);

/// Reports for every initial configuration with 1..N agents. Configurations
/// are analysed concurrently (jobs <= 0: OpenMP default); errors such as an
/// exhausted budget are recorded per configuration.
std::vector<ToleranceReport> check_robustness(const BoundProtocol& bp, std::uint64_t n,
                                              const ExploreOptions& opts = {}, int jobs = 0);
/// Single-threaded reference for check_robustness.
std::vector<ToleranceReport> check_robustness_serial(const BoundProtocol& bp, std::uint64_t n,
                                                     const ExploreOptions& opts = {});

struct WellSpecifiedResult {
  bool ok = true;
  std::vector<ToleranceReport> violations;  // wrong or undecided out_0, or errors
  std::size_t checked = 0;
};

WellSpecifiedResult check_well_specified(const BoundProtocol& bp, std::uint64_t n, const ExploreOptions& opts = {},
                                         int jobs = 0);

/// Shortest move sequence from `from` to a configuration satisfying `goal`,
/// if one exists within the budget.
template <typename Goal>
std::optional<ExecutionTrace> find_move_path(const Protocol& p, const Configuration& from, Goal&& goal,
                                             const ExploreOptions& opts = {}) {
  SnipeExplorer ex(p, from, opts);
  for (NodeId v = 0; v < ex.node_count(); ++v) {
    if (goal(ex.node(v))) return ex.trace_to(v);
  }
  return std::nullopt;
}

}  // namespace pp
