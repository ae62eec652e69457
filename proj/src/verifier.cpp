#include "pp/verifier.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>

#include <omp.h>

namespace pp {

std::uint64_t default_node_budget() {
  if (const char* env = std::getenv("PP_NODE_BUDGET")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 5'000'000;
}

std::string to_string(const Tolerance& t) {
  return t.unbounded ? std::string("unbounded") : std::to_string(t.value);
}

// -- SnipeExplorer -------------------------------------------------------------

SnipeExplorer::SnipeExplorer(Protocol p, Configuration start, ExploreOptions opts)
    : p_(std::move(p)), opts_(opts), index_(64, Hash{&nodes_}, Eq{&nodes_}) {
  if (opts_.invariants) {
    for (const auto& inv : *opts_.invariants) tallies_.push_back({inv.name, 0, 0});
  }
  intern(std::move(start), 0, kNoNode, {});
  close_under_moves(0);
  finish_layer(0);
}

NodeId SnipeExplorer::intern(Configuration c, std::uint32_t depth, NodeId parent, const StepLabel& via) {
  nodes_.push_back(std::move(c));
  const auto id = static_cast<NodeId>(nodes_.size() - 1);
  auto [it, inserted] = index_.insert(id);
  if (!inserted) {
    nodes_.pop_back();
    return *it;
  }
  if (nodes_.size() > opts_.node_budget) {
    index_.erase(id);
    nodes_.pop_back();
    throw BudgetExceeded("node budget of " + std::to_string(opts_.node_budget) + " exhausted");
  }
  depth_.push_back(depth);
  parent_.push_back(parent);
  via_.push_back(via);
  label_.push_back(output_of(p_, nodes_.back()));
  adj_.emplace_back();
  return id;
}

void SnipeExplorer::close_under_moves(NodeId from) {
  for (NodeId v = from; v < nodes_.size(); ++v) {
    const Configuration here = nodes_[v];
    const auto d = depth_[v];
    for_each_move(p_, here, scratch_, [&](const Transition& t, Configuration succ) {
      if (opts_.invariants) {
        const auto& invs = *opts_.invariants;
        for (std::size_t i = 0; i < invs.size(); ++i) {
          ++tallies_[i].checked;
          if (!invs[i].holds(t)) ++tallies_[i].violated;
        }
      }
      const auto w = intern(std::move(succ), d, v, StepLabel::move(t));
      adj_[v].push_back(w);
    });
  }
}

void SnipeExplorer::finish_layer(NodeId first) {
  const auto last = static_cast<NodeId>(nodes_.size());
  const auto before = comps_.members.size();
  strongly_connected_components(adj_, first, last, comps_);
  std::optional<Decision> acc;
  if (!layer_out_.empty()) acc = layer_out_.back();
  for (auto c = before; c < comps_.members.size(); ++c) {
    Decision value = label_[comps_.members[c].front()];
    for (auto v : comps_.members[c]) value = meet(value, label_[v]);
    comp_value_.push_back(value);
    if (comps_.bottom[c]) acc = acc ? meet(*acc, value) : value;
  }
  layer_out_.push_back(acc.value_or(Decision::Undecided));
  layer_end_.push_back(last);
}

void SnipeExplorer::advance() {
  const auto k = static_cast<std::uint32_t>(layer_out_.size());
  const NodeId begin = k >= 2 ? layer_end_[k - 2] : 0;
  const NodeId end = layer_end_[k - 1];
  const auto first = static_cast<NodeId>(nodes_.size());
  for (NodeId v = begin; v < end; ++v) {
    const Configuration here = nodes_[v];
    for (const auto& e : here.entries()) intern(apply_snipe(here, e.state), k, v, StepLabel::snipe(e.state));
  }
  close_under_moves(first);
  finish_layer(first);
}

std::optional<NodeId> SnipeExplorer::find(const Configuration& c) const {
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v] == c) return v;
  }
  return std::nullopt;
}

std::optional<NodeId> SnipeExplorer::witness(std::size_t k, Decision expected) const {
  if (k >= layer_end_.size()) k = layer_end_.size() - 1;
  std::optional<NodeId> best;
  for (std::size_t c = 0; c < comps_.members.size(); ++c) {
    if (!comps_.bottom[c]) continue;
    const auto& members = comps_.members[c];
    if (depth_[members.front()] > k || comp_value_[c] == expected) continue;
    for (auto v : members) {
      if (label_[v] == expected) continue;
      if (!best || depth_[v] < depth_[*best] || (depth_[v] == depth_[*best] && v < *best)) best = v;
      break;
    }
  }
  return best;
}

ExecutionTrace SnipeExplorer::trace_to(NodeId v) const {
  std::vector<NodeId> path;
  for (NodeId u = v; u != kNoNode; u = parent_.at(u)) path.push_back(u);
  std::reverse(path.begin(), path.end());
  ExecutionTrace trace;
  trace.start = nodes_[path.front()];
  for (std::size_t i = 1; i < path.size(); ++i) trace.steps.push_back({via_[path[i]], nodes_[path[i]]});
  trace.terminal = is_terminal(p_, trace.final_config());
  return trace;
}

std::uint64_t SnipeExplorer::invariant_violations() const {
  std::uint64_t n = 0;
  for (const auto& t : tallies_) n += t.violated;
  return n;
}

// -- free functions ------------------------------------------------------------

ReachabilityGraph move_closure(const Protocol& p, const std::vector<Configuration>& seeds,
                               const ExploreOptions& opts) {
  ReachabilityGraph g;
  std::unordered_map<Configuration, NodeId, ConfigurationHash> index;
  auto intern = [&](Configuration c) {
    auto [it, inserted] = index.try_emplace(c, static_cast<NodeId>(g.nodes.size()));
    if (inserted) {
      if (g.nodes.size() >= opts.node_budget) {
        throw BudgetExceeded("node budget of " + std::to_string(opts.node_budget) + " exhausted");
      }
      g.output.push_back(output_of(p, c));
      g.nodes.push_back(std::move(c));
      g.edges.emplace_back();
    }
    return it->second;
  };
  for (const auto& s : seeds) intern(s);
  std::vector<Transition> scratch;
  for (NodeId v = 0; v < g.nodes.size(); ++v) {
    const Configuration here = g.nodes[v];
    for_each_move(p, here, scratch, [&](const Transition&, Configuration succ) {
      const auto w = intern(std::move(succ));
      g.edges[v].push_back(w);
    });
  }
  return g;
}

Decision out0(const Protocol& p, const Configuration& c, const ExploreOptions& opts) {
  return SnipeExplorer(p, c, opts).out(0);
}

LayeredReach reachable_with_snipes(const Protocol& p, const Configuration& c, std::size_t i,
                                   const ExploreOptions& opts) {
  SnipeExplorer ex(p, c, opts);
  while (ex.layers() <= i && ex.layers() <= c.size()) ex.advance();
  LayeredReach r;
  for (NodeId v = 0; v < ex.node_count(); ++v) {
    r.nodes.push_back(ex.node(v));
    r.depth.push_back(ex.depth(v));
  }
  return r;
}

Decision out_i(const Protocol& p, const Configuration& c, std::size_t i, const ExploreOptions& opts) {
  SnipeExplorer ex(p, c, opts);
  while (ex.layers() <= i && ex.layers() <= c.size()) ex.advance();
  return ex.out(std::min<std::size_t>(i, ex.layers() - 1));
}

namespace {

// Tolerance from the least number of removed agents that changes the value;
// `fail` is 0 when no removal changes it.
Tolerance tolerance_from_failure(std::uint64_t size, std::uint64_t fail) {
  if (fail == 0) return {size == 0 ? 0 : size - 1, true};
  return {fail - 1, false};
}

// Calls f(sub) for every sub-configuration of c.
template <typename F>
void for_each_sub_configuration(const Configuration& c, F&& f) {
  const auto entries = c.entries();
  std::vector<std::uint32_t> take(entries.size(), 0);
  while (true) {
    std::vector<std::pair<StateId, std::uint32_t>> counts;
    for (std::size_t j = 0; j < entries.size(); ++j) counts.emplace_back(entries[j].state, take[j]);
    f(Configuration::from_counts(counts));
    std::size_t j = 0;
    while (j < entries.size() && take[j] == entries[j].count) take[j++] = 0;
    if (j == entries.size()) return;
    ++take[j];
  }
}

}  // namespace

Tolerance initial_tolerance(const BoundProtocol& bp, const Configuration& c) {
  const auto x = bp.input_vector(c);
  const bool value = bp.predicate.eval(x);
  std::vector<std::int64_t> y(x.size(), 0);
  std::uint64_t fail = 0;
  while (true) {
    std::int64_t removed = 0;
    for (std::size_t j = 0; j < x.size(); ++j) removed += x[j] - y[j];
    if (removed > 0 && (fail == 0 || static_cast<std::uint64_t>(removed) < fail) && bp.predicate.eval(y) != value) {
      fail = static_cast<std::uint64_t>(removed);
    }
    std::size_t j = 0;
    while (j < x.size() && y[j] == x[j]) y[j++] = 0;
    if (j == x.size()) break;
    ++y[j];
  }
  return tolerance_from_failure(c.size(), fail);
}

Tolerance initial_tolerance_by_protocol(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts) {
  const auto expect = out0(bp.protocol, c, opts);
  if (expect == Decision::Undecided) throw IllSpecified("out_0 is undecided");
  const std::vector<std::int64_t> zero(bp.predicate.variables().size(), 0);
  const auto empty_value = bp.predicate.eval(zero) ? Decision::Accept : Decision::Reject;
  std::uint64_t fail = 0;
  for_each_sub_configuration(c, [&](const Configuration& d) {
    const auto removed = c.size() - d.size();
    if (removed == 0 || (fail != 0 && removed >= fail)) return;
    const auto got = d.empty() ? empty_value : out0(bp.protocol, d, opts);
    if (got != expect) fail = removed;
  });
  return tolerance_from_failure(c.size(), fail);
}

namespace {

// Explores layers until out_k departs from out_0; returns the tolerance and
// the failing layer (0 if none).
std::pair<Tolerance, std::size_t> scan_layers(SnipeExplorer& ex, std::uint64_t size) {
  const auto base = ex.out(0);
  for (std::size_t k = 1; k <= size; ++k) {
    if (ex.layers() <= k) ex.advance();
    if (ex.out(k) != base) return {tolerance_from_failure(size, k), k};
  }
  return {tolerance_from_failure(size, 0), 0};
}

}  // namespace

Tolerance global_tolerance(const Protocol& p, const Configuration& c, const ExploreOptions& opts) {
  SnipeExplorer ex(p, c, opts);
  if (ex.out(0) == Decision::Undecided) throw IllSpecified("out_0 is undecided");
  return scan_layers(ex, c.size()).first;
}

ToleranceReport analyze(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts) {
  ToleranceReport r;
  r.config = c;
  r.input = bp.input_vector(c);
  r.expected = bp.predicate.eval(r.input);
  r.intol = initial_tolerance(bp, c);
  ExploreOptions local = opts;
  if (!local.invariants && !bp.invariants.empty()) local.invariants = &bp.invariants;
  std::optional<SnipeExplorer> ex;
  try {
    ex.emplace(bp.protocol, c, local);
    r.out0 = ex->out(0);
    const auto expected = r.expected ? Decision::Accept : Decision::Reject;
    r.well_specified = r.out0 == expected;
    if (!r.well_specified) {
      if (auto w = ex->witness(0, expected)) r.counterexample = ex->trace_to(*w);
    }
    if (r.out0 != Decision::Undecided) {
      auto [tol, failing] = scan_layers(*ex, c.size());
      r.tol = tol;
      r.robust = r.well_specified && tol.value == r.intol.value;
      if (r.well_specified && !r.robust && failing != 0) {
        if (auto w = ex->witness(failing, r.out0)) r.counterexample = ex->trace_to(*w);
      }
    }
  } catch (const BudgetExceeded& e) {
    r.error = e.what();
    r.tol.reset();
    r.robust = false;
  }
  if (ex) {
    r.nodes = ex->node_count();
    r.invariants = ex->invariant_tallies();
  }
  return r;
}

namespace {

class Composer {
 public:
  explicit Composer(const ExploreOptions& opts) : opts_(opts) { opts_.invariants = nullptr; }

  std::optional<Decision> out(const Protocol& p, const Configuration& c, std::size_t i) {
    if (c.empty()) return Decision::Reject;
    i = std::min<std::size_t>(i, c.size());
    const auto comp = composition_of(p);
    if (!comp) return leaf(p, c, i);
    if (comp->kind == Composition::Kind::Negation) {
      // the empty configuration rejects on both sides of a negation
      auto inner = out(comp->left, c, std::min<std::size_t>(i, c.size() - 1));
      if (!inner) return std::nullopt;
      auto d = *inner == Decision::Accept ? Decision::Reject
               : *inner == Decision::Reject ? Decision::Accept
                                            : Decision::Undecided;
      return i == c.size() ? meet(d, Decision::Reject) : d;
    }
    const auto l = out(comp->left, project(c, *comp, 0), i);
    const auto dominant = comp->op == BoolOp::Or ? Decision::Accept : Decision::Reject;
    if (l == dominant) return dominant;
    const auto r = out(comp->right, project(c, *comp, 1), i);
    if (r == dominant) return dominant;
    if (!l || !r) return std::nullopt;
    if (*l == Decision::Undecided && *r == Decision::Undecided) return std::nullopt;
    if (*l == *r) return *l;     // both recessive
    return Decision::Undecided;  // one recessive, one undecided
  }

  std::uint64_t nodes() const {
    std::uint64_t n = 0;
    for (const auto& [key, ex] : leaves_) n += ex->node_count();
    return n;
  }

 private:
  static Configuration project(const Configuration& c, const Composition& comp, int side) {
    std::vector<std::pair<StateId, std::uint32_t>> counts;
    for (const auto& e : c.entries()) counts.emplace_back(comp.component(e.state, side), e.count);
    return Configuration::from_counts(counts);
  }

  Decision leaf(const Protocol& p, const Configuration& c, std::size_t i) {
    auto& ex = leaves_[{p.model_ptr().get(), c.canonical_bytes()}];
    if (!ex) ex = std::make_unique<SnipeExplorer>(p, c, opts_);
    while (ex->layers() <= i) ex->advance();
    return ex->out(i);
  }

  ExploreOptions opts_;
  std::map<std::pair<const ProtocolModel*, std::string>, std::unique_ptr<SnipeExplorer>> leaves_;
};

}  // namespace

std::optional<Decision> composed_out(const Protocol& p, const Configuration& c, std::size_t i,
                                     const ExploreOptions& opts) {
  return Composer(opts).out(p, c, i);
}

ToleranceReport analyze_composed(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts) {
  ToleranceReport r;
  r.config = c;
  r.input = bp.input_vector(c);
  r.expected = bp.predicate.eval(r.input);
  r.intol = initial_tolerance(bp, c);
  Composer k(opts);
  try {
    const auto base = k.out(bp.protocol, c, 0);
    if (!base) {
      r.error = "out_0 is not determined by the components";
    } else {
      r.out0 = *base;
      r.well_specified = r.out0 == (r.expected ? Decision::Accept : Decision::Reject);
    }
    if (base && r.out0 != Decision::Undecided) {
      // least number of initial removals reaching a different out_0, 0 if none
      std::optional<std::uint64_t> sub_fail;
      auto removal_bound = [&] {
        std::uint64_t fail = 0;
        for_each_sub_configuration(c, [&](const Configuration& d) {
          const auto removed = c.size() - d.size();
          if (removed == 0 || (fail != 0 && removed >= fail)) return;
          const auto got = k.out(bp.protocol, d, 0);
          if (got && *got != r.out0) fail = removed;
        });
        return fail;
      };
      std::uint64_t fail = 0;
      for (std::uint64_t i = 1; i <= c.size() && fail == 0; ++i) {
        const auto oi = k.out(bp.protocol, c, i);
        if (oi && *oi == r.out0) continue;
        if (oi) {
          fail = i;
          break;
        }
        if (!sub_fail) sub_fail = removal_bound();
        if (*sub_fail == 0 || *sub_fail > i) {
          r.error = "out_" + std::to_string(i) + " is not determined by the components";
          break;
        }
        fail = i;
      }
      if (r.error.empty()) {
        r.tol = tolerance_from_failure(c.size(), fail);
        r.robust = r.well_specified && r.tol->value == r.intol.value;
      }
    }
  } catch (const BudgetExceeded& e) {
    r.error = e.what();
    r.tol.reset();
    r.robust = false;
  }
  r.nodes = k.nodes();
  return r;
}

std::vector<Configuration> initial_configurations(const BoundProtocol& bp, std::uint64_t max_agents,
                                                  std::uint64_t min_agents) {
  const auto dim = bp.inputs.size();
  std::set<std::pair<std::uint64_t, Configuration>> found;
  std::vector<std::int64_t> x(dim, 0);
  if (dim == 0) return {};
  // all vectors with coordinate sum <= max_agents
  while (true) {
    std::uint64_t sum = 0;
    for (auto v : x) sum += static_cast<std::uint64_t>(v);
    if (sum >= min_agents && sum >= 1) {
      auto c = bp.initial_configuration(x);
      found.emplace(c.size(), std::move(c));
    }
    std::size_t j = 0;
    while (j < dim) {
      if (sum < max_agents) {
        ++x[j];
        break;
      }
      sum -= static_cast<std::uint64_t>(x[j]);
      x[j++] = 0;
    }
    if (j == dim) break;
  }
  std::vector<Configuration> out;
  out.reserve(found.size());
  for (auto& [size, c] : found) out.push_back(c);
  return out;
}

namespace {

ToleranceReport analyze_guarded(const BoundProtocol& bp, const Configuration& c, const ExploreOptions& opts) {
  try {
    return analyze(bp, c, opts);
  } catch (const std::exception& e) {
    ToleranceReport r;
    r.config = c;
    r.error = e.what();
    return r;
  }
}

}  // namespace

std::vector<ToleranceReport> check_robustness(const BoundProtocol& bp, std::uint64_t n, const ExploreOptions& opts,
                                              int jobs) {
  const auto configs = initial_configurations(bp, n);
  std::vector<ToleranceReport> reports(configs.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    reports[static_cast<std::size_t>(i)] = analyze_guarded(bp, configs[static_cast<std::size_t>(i)], opts);
  }
  return reports;
}

std::vector<ToleranceReport> check_robustness_serial(const BoundProtocol& bp, std::uint64_t n,
                                                     const ExploreOptions& opts) {
  std::vector<ToleranceReport> reports;
  for (const auto& c : initial_configurations(bp, n)) reports.push_back(analyze_guarded(bp, c, opts));
  return reports;
}

WellSpecifiedResult check_well_specified(const BoundProtocol& bp, std::uint64_t n, const ExploreOptions& opts,
                                         int jobs) {
  const auto configs = initial_configurations(bp, n);
  std::vector<ToleranceReport> reports(configs.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& c = configs[static_cast<std::size_t>(i)];
    ToleranceReport& r = reports[static_cast<std::size_t>(i)];
    r.config = c;
    try {
      r.input = bp.input_vector(c);
      r.expected = bp.predicate.eval(r.input);
      ExploreOptions local = opts;
      if (!local.invariants && !bp.invariants.empty()) local.invariants = &bp.invariants;
      SnipeExplorer ex(bp.protocol, c, local);
      r.out0 = ex.out(0);
      const auto expected = r.expected ? Decision::Accept : Decision::Reject;
      r.well_specified = r.out0 == expected;
      if (!r.well_specified) {
        if (auto w = ex.witness(0, expected)) r.counterexample = ex.trace_to(*w);
      }
      r.nodes = ex.node_count();
      r.invariants = ex.invariant_tallies();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  }
  WellSpecifiedResult result;
  result.checked = reports.size();
  for (auto& r : reports) {
    if (!r.well_specified || !r.error.empty()) {
      result.ok = false;
      result.violations.push_back(std::move(r));
    }
  }
  return result;
}

}  // namespace pp
