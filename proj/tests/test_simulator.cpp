#include <gtest/gtest.h>

#include "pp/simulator.hpp"
#include "pp/verifier.hpp"

using namespace pp;

namespace {

bool same_trace(const ExecutionTrace& a, const ExecutionTrace& b) {
  if (a.start != b.start || a.steps.size() != b.steps.size() || a.terminal != b.terminal) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.config != y.config || x.label.kind != y.label.kind) return false;
    if (x.label.kind == StepLabel::Kind::Snipe ? x.label.sniped != y.label.sniped
                                               : !x.label.transition.same_rule(y.label.transition)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Simulator, TowerConvergesToAllTop) {
  auto bp = build_tower(4);
  auto c0 = bp.initial_configuration({5});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SchedulerConfig sc;
    sc.seed = seed;
    auto r = run_execution(bp.protocol, c0, sc);
    ASSERT_TRUE(r.converged);
    ASSERT_TRUE(r.terminal);
    EXPECT_EQ(r.output, Decision::Accept);
    EXPECT_EQ(r.final_config.count(bp.protocol.state_named("4")), 5u);
  }
}

TEST(Simulator, SingleAgentIsImmediatelyTerminal) {
  auto bp = build_pebbles(3);
  auto r = run_execution(bp.protocol, bp.initial_configuration({1}), SchedulerConfig{});
  EXPECT_TRUE(r.terminal);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_TRUE(r.trace.steps.empty());
  auto empty = run_execution(bp.protocol, Configuration{}, SchedulerConfig{});
  EXPECT_EQ(empty.output, Decision::Reject);
}

TEST(Simulator, RunsAreReproducible) {
  auto bp = build_from_expression("weak_convert(gen_majority(x:1,y:-2))");
  auto c0 = bp.initial_configuration({5, 2});
  SchedulerConfig sc;
  sc.seed = 99;
  for (auto sniper : {SniperStrategy::none(), SniperStrategy::random_budget(2)}) {
    auto a = run_execution(bp.protocol, c0, sc, sniper);
    auto b = run_execution(bp.protocol, c0, sc, sniper);
    EXPECT_TRUE(same_trace(a.trace, b.trace));
    EXPECT_EQ(a.steps, b.steps);
    EXPECT_EQ(a.final_config, b.final_config);
  }
  sc.seed = 100;
  auto c = run_execution(bp.protocol, c0, sc, SniperStrategy::random_budget(2));
  sc.seed = 99;
  auto d = run_execution(bp.protocol, c0, sc, SniperStrategy::random_budget(2));
  EXPECT_FALSE(same_trace(c.trace, d.trace));
}

TEST(Simulator, TracesReplayAndRespectTheSnipeBudget) {
  for (const char* expr : {"pebbles(4)", "tower(3)", "weak_convert(inhom_tower_cancel(x:2,y:-1;3))",
                           "and(tower(2),negate(pebbles(3)))"}) {
    auto bp = build_from_expression(expr);
    std::vector<std::int64_t> x(bp.inputs.size(), 4);
    auto c0 = bp.initial_configuration(x);
    for (std::uint64_t k : {0u, 1u, 3u}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SchedulerConfig sc;
        sc.seed = seed;
        sc.max_steps = 20000;
        auto sniper = SniperStrategy::random_budget(k);
        auto r = run_execution(bp.protocol, c0, sc, sniper);
        ASSERT_EQ(replay(bp.protocol, r.trace), r.final_config) << expr;
        ASSERT_LE(r.trace.snipe_count(), sniper.snipe_budget());
        ASSERT_EQ(r.trace.snipe_count(), r.snipes);
        ASSERT_EQ(r.final_config.size() + r.snipes, c0.size());
      }
    }
  }
}

TEST(Simulator, ConvergedRunsAgreeWithOut0) {
  for (const char* expr : {"tower(3)", "pebbles(3)", "weak_convert(gen_majority(x:1,y:-2))",
                           "threshold(x:1,y:-1;0)"}) {
    auto bp = build_from_expression(expr);
    for (const auto& c0 : initial_configurations(bp, 5, 2)) {
      const auto expected = out0(bp.protocol, c0);
      if (expected == Decision::Undecided) continue;
      for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SchedulerConfig sc;
        sc.seed = seed;
        sc.record_trace = false;
        auto r = run_execution(bp.protocol, c0, sc);
        if (r.converged) {
          ASSERT_EQ(r.output, expected) << expr << " seed " << seed;
        }
      }
    }
  }
}

TEST(Simulator, ScriptedSnipesAndSkips) {
  auto bp = build_tower(4);
  const auto& P = bp.protocol;
  auto c0 = bp.initial_configuration({5});
  SchedulerConfig sc;
  sc.seed = 1;
  // the first snipe hits an occupied state, the second an empty one
  auto r = run_execution(P, c0, sc,
                         SniperStrategy::scripted({{0, P.state_named("1")}, {1, P.state_named("3")}}));
  EXPECT_EQ(r.snipes, 1u);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].state, P.state_named("3"));
  ASSERT_FALSE(r.trace.steps.empty());
  EXPECT_EQ(r.trace.steps[0].label.kind, StepLabel::Kind::Snipe);
  EXPECT_EQ(r.final_config.size(), 4u);
  EXPECT_EQ(r.output, Decision::Accept);
}

TEST(Simulator, ReplayAppliesTheTraceFirst) {
  auto bp = build_pebbles(3);
  auto c0 = bp.initial_configuration({4});
  auto report = analyze(bp, c0);
  ASSERT_TRUE(report.counterexample);
  SchedulerConfig sc;
  sc.seed = 3;
  auto r = run_execution(bp.protocol, c0, sc, SniperStrategy::replay(*report.counterexample));
  EXPECT_EQ(r.snipes, report.counterexample->snipe_count());
  EXPECT_EQ(r.output, Decision::Reject);  // the witness ends terminal and rejecting
  EXPECT_TRUE(r.terminal);
}

TEST(Simulator, BatchWithOneTrialIsOneRun) {
  auto bp = build_tower(3);
  auto c0 = bp.initial_configuration({4});
  BatchOptions opts;
  opts.trials = 1;
  opts.master_seed = 42;
  auto stats = batch_estimate(bp, c0, opts);
  SchedulerConfig sc = opts.scheduler;
  sc.seed = trial_seed(opts.master_seed, 0);
  auto r = run_execution(bp.protocol, c0, sc);
  ASSERT_EQ(stats.per_budget.size(), 1u);
  EXPECT_EQ(stats.per_budget[0].converged, r.converged ? 1u : 0u);
  EXPECT_DOUBLE_EQ(stats.per_budget[0].mean_steps, double(r.steps));
}

TEST(Simulator, ParallelBatchMatchesSerial) {
  auto bp = build_from_expression("weak_convert(gen_majority(x:1,y:-2))");
  auto c0 = bp.initial_configuration({4, 1});
  BatchOptions opts;
  opts.trials = 60;
  opts.master_seed = 7;
  opts.snipe_budgets = {0, 1, 2};
  opts.jobs = 4;
  auto a = batch_estimate(bp, c0, opts);
  auto b = batch_estimate_serial(bp, c0, opts);
  ASSERT_EQ(a.per_budget.size(), b.per_budget.size());
  for (std::size_t i = 0; i < a.per_budget.size(); ++i) {
    EXPECT_EQ(a.per_budget[i].converged, b.per_budget[i].converged);
    EXPECT_EQ(a.per_budget[i].correct, b.per_budget[i].correct);
    EXPECT_EQ(a.per_budget[i].snipes, b.per_budget[i].snipes);
    EXPECT_DOUBLE_EQ(a.per_budget[i].mean_steps, b.per_budget[i].mean_steps);
  }
  EXPECT_TRUE(a.expected);
  EXPECT_EQ(a.per_budget[0].correct, a.per_budget[0].converged);
}

TEST(Simulator, TrialSeedsDiffer) {
  EXPECT_NE(trial_seed(0, 0), trial_seed(0, 1));
  EXPECT_NE(trial_seed(0, 0), trial_seed(1, 0));
  EXPECT_EQ(trial_seed(5, 9), trial_seed(5, 9));
}
