#include "pp/simulator.hpp"

#include <algorithm>
#include <random>

#include <omp.h>

namespace pp {

SniperStrategy SniperStrategy::scripted(std::vector<ScriptedSnipe> script) {
  std::stable_sort(script.begin(), script.end(),
                   [](const ScriptedSnipe& a, const ScriptedSnipe& b) { return a.step < b.step; });
  SniperStrategy s;
  s.kind = Kind::Scripted;
  s.budget = script.size();
  s.script = std::move(script);
  return s;
}

SniperStrategy SniperStrategy::random_budget(std::uint64_t k) {
  SniperStrategy s;
  s.kind = k == 0 ? Kind::None : Kind::RandomBudget;
  s.budget = k;
  return s;
}

SniperStrategy SniperStrategy::replay(ExecutionTrace trace) {
  SniperStrategy s;
  s.kind = Kind::Replay;
  s.budget = trace.snipe_count();
  s.trace = std::move(trace);
  return s;
}

std::uint64_t SniperStrategy::snipe_budget() const {
  switch (kind) {
    case Kind::None: return 0;
    case Kind::Scripted: return script.size();
    case Kind::RandomBudget: return budget;
    case Kind::Replay: return trace ? trace->snipe_count() : 0;
  }
  return 0;
}

namespace {

struct Timed {
  std::uint64_t step;
  std::optional<StateId> state;  // empty: uniform over occupied states
};

StateId agent_state(const Configuration& c, std::uint64_t agent) {
  for (const auto& e : c.entries()) {
    if (agent < e.count) return e.state;
    agent -= e.count;
  }
  throw std::out_of_range("agent index beyond the population");
}

}  // namespace

RunOutcome run_execution(const Protocol& p, const Configuration& c0, const SchedulerConfig& scheduler,
                         const SniperStrategy& sniper) {
  std::mt19937_64 rng(scheduler.seed);
  RunOutcome out;
  out.trace.start = c0;
  Configuration c = c0;
  // a given pair meets once per n(n-1)/2 interactions on average
  const std::uint64_t n = c0.size();
  const std::uint64_t window =
      scheduler.convergence_window ? scheduler.convergence_window : 50 * std::max<std::uint64_t>({1, n, n * (n - 1) / 2});

  auto note = [&](const StepLabel& label) {
    if (scheduler.record_trace) out.trace.steps.push_back({label, c});
  };

  if (sniper.kind == SniperStrategy::Kind::Replay && sniper.trace) {
    for (const auto& step : sniper.trace->steps) {
      if (step.label.kind == StepLabel::Kind::Move) {
        c = apply_move(p, c, step.label.transition);
        ++out.steps;
      } else {
        c = apply_snipe(c, step.label.sniped);
        ++out.snipes;
      }
      note(step.label);
    }
  }

  std::vector<Timed> schedule;
  if (sniper.kind == SniperStrategy::Kind::Scripted) {
    for (const auto& s : sniper.script) schedule.push_back({s.step, s.state});
  } else if (sniper.kind == SniperStrategy::Kind::RandomBudget) {
    std::uniform_int_distribution<std::uint64_t> when(0, std::max<std::uint64_t>(1, scheduler.max_steps / 2) - 1);
    for (std::uint64_t k = 0; k < sniper.budget; ++k) schedule.push_back({when(rng), std::nullopt});
    std::sort(schedule.begin(), schedule.end(), [](const Timed& a, const Timed& b) { return a.step < b.step; });
  }
  std::size_t pending = 0;

  bool terminal = is_terminal(p, c);
  Decision output = output_of(p, c);
  std::uint64_t stable = 0;
  auto refresh = [&] {
    terminal = is_terminal(p, c);
    const auto now = output_of(p, c);
    if (now != output) stable = 0;
    output = now;
  };

  std::vector<Transition> options;
  while (true) {
    while (pending < schedule.size() && schedule[pending].step <= out.steps) {
      const auto& s = schedule[pending++];
      std::optional<StateId> target = s.state;
      if (!target) {
        if (c.empty()) continue;
        const auto entries = c.entries();
        std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
        target = entries[pick(rng)].state;
      }
      if (c.count(*target) == 0) {
        out.skipped.push_back({s.step, *target});
        continue;
      }
      c = apply_snipe(c, *target);
      ++out.snipes;
      note(StepLabel::snipe(*target));
      refresh();
    }
    const bool snipes_left = pending < schedule.size();
    if (!snipes_left) {
      if (terminal || (output != Decision::Undecided && stable >= window)) {
        out.converged = true;
        break;
      }
    }
    if (out.steps >= scheduler.max_steps) break;
    if (terminal) {
      // nothing can change before the next snipe
      out.steps = std::min(schedule[pending].step, scheduler.max_steps);
      continue;
    }

    const auto n = c.size();
    std::uniform_int_distribution<std::uint64_t> first(0, n - 1), second(0, n - 2);
    const auto a = first(rng);
    auto b = second(rng);
    if (b >= a) ++b;
    options = p.transitions_for(agent_state(c, a), agent_state(c, b), true);
    std::uniform_int_distribution<std::size_t> choose(0, options.size() - 1);
    const auto& t = options[choose(rng)];
    ++out.steps;
    if (!t.silent()) {
      c = apply_move(c, t);
      note(StepLabel::move(t));
      refresh();
    }
    if (output != Decision::Undecided) ++stable;
  }

  out.final_config = c;
  out.output = output;
  out.terminal = terminal;
  out.trace.terminal = terminal;
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over the combined input
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

struct TrialResult {
  bool converged = false;
  bool exhausted = false;
  bool correct = false;
  std::uint64_t steps = 0;
  std::uint64_t snipes = 0;
};

TrialResult run_trial(const BoundProtocol& bp, const Configuration& c0, const BatchOptions& opts,
                      std::uint64_t budget, std::uint64_t index, Decision expected) {
  SchedulerConfig sc = opts.scheduler;
  sc.seed = trial_seed(opts.master_seed ^ (budget * 0xD1B54A32D192ED03ULL), index);
  sc.record_trace = false;
  const auto r = run_execution(bp.protocol, c0, sc, SniperStrategy::random_budget(budget));
  return {r.converged, !r.converged && r.steps >= sc.max_steps, r.converged && r.output == expected, r.steps,
          r.snipes};
}

BatchStats aggregate(const BatchOptions& opts, bool expected, const std::vector<TrialResult>& results) {
  BatchStats stats;
  stats.expected = expected;
  for (std::size_t b = 0; b < opts.snipe_budgets.size(); ++b) {
    BudgetStats s;
    s.budget = opts.snipe_budgets[b];
    double steps = 0;
    for (std::uint64_t i = 0; i < opts.trials; ++i) {
      const auto& r = results[b * opts.trials + i];
      ++s.trials;
      s.snipes += r.snipes;
      if (r.exhausted) ++s.exhausted;
      if (r.converged) {
        ++s.converged;
        steps += double(r.steps);
      }
      if (r.correct) ++s.correct;
    }
    s.mean_steps = s.converged ? steps / double(s.converged) : 0.0;
    stats.per_budget.push_back(s);
  }
  return stats;
}

}  // namespace

BatchStats batch_estimate(const BoundProtocol& bp, const Configuration& c0, const BatchOptions& opts) {
  const bool expected = bp.eval(c0);
  const auto want = expected ? Decision::Accept : Decision::Reject;
  const auto total = static_cast<std::int64_t>(opts.trials * opts.snipe_budgets.size());
  std::vector<TrialResult> results(static_cast<std::size_t>(total));
  const int threads = opts.jobs > 0 ? opts.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t k = 0; k < total; ++k) {
    const auto b = static_cast<std::size_t>(k) / opts.trials;
    const auto i = static_cast<std::uint64_t>(k) % opts.trials;
    results[static_cast<std::size_t>(k)] = run_trial(bp, c0, opts, opts.snipe_budgets[b], i, want);
  }
  return aggregate(opts, expected, results);
}

BatchStats batch_estimate_serial(const BoundProtocol& bp, const Configuration& c0, const BatchOptions& opts) {
  const bool expected = bp.eval(c0);
  const auto want = expected ? Decision::Accept : Decision::Reject;
  std::vector<TrialResult> results;
  for (const auto budget : opts.snipe_budgets) {
    for (std::uint64_t i = 0; i < opts.trials; ++i) results.push_back(run_trial(bp, c0, opts, budget, i, want));
  }
  return aggregate(opts, expected, results);
}

}  // namespace pp
