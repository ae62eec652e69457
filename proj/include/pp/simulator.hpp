#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pp/builders.hpp"
#include "pp/trace.hpp"

namespace pp {

struct SchedulerConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1'000'000;
  /// Steps with a constant decided output that count as converged;
  /// 0 means 50 * max(|C0|, |C0|(|C0|-1)/2).
  std::uint64_t convergence_window = 0;
  /// Record changed configurations in the outcome's trace.
  bool record_trace = true;
};

struct ScriptedSnipe {
  std::uint64_t step = 0;  // fires before interaction number `step`
  StateId state{};
};

struct SniperStrategy {
  enum class Kind { None, Scripted, RandomBudget, Replay };
  Kind kind = Kind::None;
  std::vector<ScriptedSnipe> script;
  std::uint64_t budget = 0;
  /// Replay: every step of the trace is applied first, then the scheduler
  /// takes over without further snipes.
  std::optional<ExecutionTrace> trace;

  static SniperStrategy none() { return {}; }
  static SniperStrategy scripted(std::vector<ScriptedSnipe> script);
  /// k snipes at times drawn uniformly from the first max_steps / 2
  /// interactions, each on a uniformly chosen occupied state.
  static SniperStrategy random_budget(std::uint64_t k);
  static SniperStrategy replay(ExecutionTrace trace);

  /// Upper bound on the snipes this strategy performs.
  std::uint64_t snipe_budget() const;
};

struct RunOutcome {
  ExecutionTrace trace;  // changed configurations only
  Configuration final_config;
  Decision output = Decision::Undecided;
  bool converged = false;  // terminal, or decided output held for the window
  bool terminal = false;
  std::uint64_t steps = 0;  // interactions drawn, silent ones included
  std::uint64_t snipes = 0;
  std::vector<ScriptedSnipe> skipped;  // scripted snipes on unoccupied states
};

/// Draws unordered agent pairs uniformly and applies a uniformly chosen rule
/// for their states (silent ones included). Convergence is only declared
/// once every scheduled snipe has fired. Deterministic in (seed, strategy).
RunOutcome run_execution(const Protocol& p, const Configuration& c0, const SchedulerConfig& scheduler,
                         const SniperStrategy& sniper = {});

struct BatchOptions {
  std::uint64_t trials = 100;
  std::uint64_t master_seed = 0;
  SchedulerConfig scheduler{};  // seed and record_trace are set per trial
  /// Each trial runs once per budget: 0 means no sniper, k > 0 RandomBudget{k}.
  std::vector<std::uint64_t> snipe_budgets{0};
  int jobs = 0;  // <= 0: OpenMP default
};

struct BudgetStats {
  std::uint64_t budget = 0;
  std::uint64_t trials = 0;
  std::uint64_t converged = 0;
  std::uint64_t correct = 0;  // converged runs whose output matches the predicate on C0
  std::uint64_t exhausted = 0;  // hit max_steps
  std::uint64_t snipes = 0;
  double mean_steps = 0;  // over converged runs
  double converged_fraction() const { return trials ? double(converged) / double(trials) : 0.0; }
  double correct_fraction() const { return converged ? double(correct) / double(converged) : 0.0; }
};

struct BatchStats {
  bool expected = false;
  std::vector<BudgetStats> per_budget;
};

/// Seed of trial `index` derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

BatchStats batch_estimate(const BoundProtocol& bp, const Configuration& c0, const BatchOptions& opts);
/// Single-threaded reference; produces the same statistics.
BatchStats batch_estimate_serial(const BoundProtocol& bp, const Configuration& c0, const BatchOptions& opts);

}  // namespace pp
