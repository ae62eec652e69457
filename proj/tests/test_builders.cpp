#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "pp/builders.hpp"
#include "pp/verifier.hpp"

using namespace pp;

namespace {

std::set<std::vector<std::string>> rule_names(const Protocol& p) {
  std::set<std::vector<std::string>> out;
  const auto table = materialize(p);
  for (const auto& t : *table.table()) {
    std::vector<std::string> pre{p.state_name(t.p), p.state_name(t.q)};
    std::vector<std::string> post{p.state_name(t.p_out), p.state_name(t.q_out)};
    // orientation-free: sort the pair of (pre, post) agent moves
    std::vector<std::pair<std::string, std::string>> moves{{pre[0], post[0]}, {pre[1], post[1]}};
    std::sort(moves.begin(), moves.end());
    out.insert({moves[0].first, moves[1].first, moves[0].second, moves[1].second});
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> interval(const std::string& name) {
  const auto comma = name.find(',');
  return {std::stoll(name.substr(1, comma - 1)), std::stoll(name.substr(comma + 1, name.size() - comma - 2))};
}

void expect_well_specified(const char* expr, std::uint64_t n) {
  auto bp = build_from_expression(expr);
  auto r = check_well_specified(bp, n);
  EXPECT_TRUE(r.ok) << expr << ": " << r.violations.size() << " violations";
  EXPECT_GT(r.checked, 0u);
}

}  // namespace

TEST(Builders, StateAndTransitionCounts) {
  auto tower = build_tower(4);
  EXPECT_EQ(tower.protocol.state_count(), 4u);
  EXPECT_EQ(materialize(tower.protocol).table()->size(), 6u);
  for (std::int64_t t = 2; t <= 6; ++t) {
    EXPECT_EQ(materialize(build_tower(t).protocol).table()->size(), static_cast<std::size_t>(2 * (t - 1)));
  }

  auto pebbles = build_pebbles(3);
  EXPECT_EQ(pebbles.protocol.state_count(), 4u);
  EXPECT_EQ(materialize(pebbles.protocol).table()->size(), 6u);

  auto gm = build_gen_majority(default_terms({1, -2}));
  EXPECT_EQ(gm.protocol.state_count(), 4u);
  EXPECT_EQ(gm.protocol.output_kind(), OutputKind::Weak);
  EXPECT_EQ(materialize(gm.protocol).table()->size(), 2u);
}

TEST(Builders, TowerOfOneAcceptsAlone) {
  auto bp = build_tower(1);
  EXPECT_EQ(bp.protocol.state_count(), 1u);
  EXPECT_TRUE(materialize(bp.protocol).table()->empty());
  EXPECT_EQ(out0(bp.protocol, bp.initial_configuration({1})), Decision::Accept);
}

TEST(Builders, InhomTowerStacksToTheTop) {
  auto bp = build_inhom_tower({{"x", 3}, {"y", 2}}, 4);
  const auto& P = bp.protocol;
  auto start = bp.initial_configuration({1, 1});
  Configuration goal;
  goal.add(P.state_named("[1,4)"));
  goal.add(P.state_named("[2,4)"));
  auto path = find_move_path(P, start, [&](const Configuration& c) { return c == goal; });
  ASSERT_TRUE(path.has_value());
  EXPECT_EQ(output_of(P, goal), Decision::Accept);
  EXPECT_TRUE(is_terminal(P, goal));
  EXPECT_EQ(replay(P, *path), goal);
}

TEST(Builders, InhomTowerContiguityBeforeAccumulation) {
  for (std::int64_t t : {4, 5}) {
    auto bp = build_inhom_tower({{"x", 3}, {"y", 2}}, t);
    const auto& P = bp.protocol;
    for (const auto& c0 : initial_configurations(bp, 5)) {
      auto g = move_closure(P, {c0});
      for (const auto& c : g.nodes) {
        std::vector<char> covered(static_cast<std::size_t>(t), 0);
        bool top = false;
        for (const auto& e : c.entries()) {
          auto [s, f] = interval(P.state_name(e.state));
          if (f == t) top = true;
          for (auto l = s; l < f; ++l) covered[static_cast<std::size_t>(l)] = 1;
        }
        if (top) continue;
        auto first_gap = std::find(covered.begin(), covered.end(), 0);
        ASSERT_TRUE(std::all_of(first_gap, covered.end(), [](char v) { return v == 0; }))
            << "non-contiguous levels in " << P.name();
      }
    }
  }
}

TEST(Builders, WeakConvertOfSignedMajority) {
  auto wc = weak_convert(build_gen_majority(default_terms({1, -2})));
  const auto& P = wc.protocol;
  EXPECT_EQ(P.output_kind(), OutputKind::Consensus);
  std::vector<std::string> names;
  for (std::uint64_t i = 0; i < P.state_count(); ++i) names.push_back(P.state_name(state(i)));
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"+0", "-0", "-1", "-2", "1"}));
  EXPECT_EQ(P.opinion(P.state_named("+0")), Opinion::Accept);
  EXPECT_EQ(P.opinion(P.state_named("-0")), Opinion::Reject);

  // derived rules re-add the negative sign; the witness rules spread the sign
  std::set<std::vector<std::string>> expected{
      {"-2", "1", "-1", "-0"},  {"-1", "1", "-0", "-0"}, {"+0", "-2", "-0", "-2"},
      {"+0", "-1", "-0", "-1"}, {"+0", "-0", "-0", "-0"}, {"-0", "1", "+0", "1"},
  };
  EXPECT_EQ(rule_names(P), expected);
}

TEST(Builders, WeakConvertProjectsToMoves) {
  for (const char* expr : {"gen_majority(x:1,y:-2)", "inhom_tower_cancel(x:2,y:-1;3)"}) {
    auto bp = weak_convert(build_from_expression(expr));
    auto it = std::find_if(bp.invariants.begin(), bp.invariants.end(),
                           [](const EdgeInvariant& inv) { return inv.name.rfind("projects to", 0) == 0; });
    ASSERT_NE(it, bp.invariants.end());
    const auto table = materialize(bp.protocol);
    for (const auto& t : *table.table()) EXPECT_TRUE(it->holds(t)) << expr;
  }
}

TEST(Builders, NegateIsAnInvolution) {
  auto tower = build_tower(3);
  auto neg = negate(tower);
  auto back = negate(neg);
  EXPECT_EQ(back.protocol.model_ptr(), tower.protocol.model_ptr());
  EXPECT_EQ(back.predicate, tower.predicate);
  for (std::uint64_t i = 0; i < tower.protocol.state_count(); ++i) {
    EXPECT_NE(neg.protocol.opinion(state(i)), tower.protocol.opinion(state(i)));
  }
  auto c = tower.initial_configuration({4});
  EXPECT_EQ(out0(neg.protocol, c), Decision::Reject);
  EXPECT_FALSE(neg.eval(c));
  EXPECT_THROW(negate(build_gen_majority(default_terms({1, -1}))), std::invalid_argument);
}

TEST(Builders, ProductStatesAndOutputs) {
  auto a = build_tower(2);
  auto b = build_pebbles(2);
  auto both = product(a, b, BoolOp::And);
  auto either = product(a, b, BoolOp::Or);
  EXPECT_EQ(both.protocol.state_count(), a.protocol.state_count() * b.protocol.state_count());
  auto pair = both.protocol.state_named("(2,0)");
  EXPECT_EQ(both.protocol.opinion(pair), Opinion::Reject);
  EXPECT_EQ(either.protocol.opinion(either.protocol.state_named("(2,0)")), Opinion::Accept);
  EXPECT_EQ(both.inputs.size(), 1u);
  EXPECT_EQ(both.protocol.state_name(both.inputs[0]), "(1,1)");

  auto comp = composition_of(both.protocol);
  ASSERT_TRUE(comp.has_value());
  EXPECT_EQ(comp->kind, Composition::Kind::Product);
  EXPECT_EQ(comp->left.state_name(comp->component(pair, 0)), "2");
  EXPECT_EQ(comp->right.state_name(comp->component(pair, 1)), "0");
  EXPECT_FALSE(composition_of(a.protocol).has_value());
}

TEST(Builders, ProductLetsEachSideStepAlone) {
  auto bp = product(build_tower(3), build_tower(2), BoolOp::And);
  const auto& P = bp.protocol;
  // (1,1),(1,1): left 1,1->1,2 alone, right 1,1->1,2 alone, or both
  auto rules = P.transitions_for(bp.inputs[0], bp.inputs[0], false);
  std::set<std::pair<std::string, std::string>> posts;
  for (const auto& t : rules) {
    auto x = P.state_name(t.p_out), y = P.state_name(t.q_out);
    posts.insert({std::min(x, y), std::max(x, y)});
  }
  EXPECT_TRUE(posts.count({"(1,1)", "(2,1)"}));
  EXPECT_TRUE(posts.count({"(1,1)", "(1,2)"}));
}

TEST(Builders, ProductNeedsConsensusSidesAndSharedVariables) {
  auto weak = build_gen_majority(default_terms({1, -1}));
  EXPECT_THROW(product(weak, build_tower(2), BoolOp::And), std::invalid_argument);
  EXPECT_THROW(product(build_tower(2), build_inhom_tower({{"z", 1}}, 2), BoolOp::And), std::invalid_argument);
}

TEST(Builders, ThresholdDispatch) {
  EXPECT_EQ(build_threshold({{"x", 1}, {"y", 2}}, 3).protocol.name().rfind("inhom_tower(", 0), 0u);
  EXPECT_EQ(build_threshold({{"x", 2}, {"y", -1}}, 3).protocol.name().rfind("weak_convert(", 0), 0u);
  EXPECT_EQ(build_threshold({{"x", 1}, {"y", -1}}, 0).protocol.name().rfind("negate(", 0), 0u);
  EXPECT_THROW(build_threshold({{"x", 0}}, 1), std::invalid_argument);
}

TEST(Builders, ModuloCoefficientsAreNormalized) {
  EXPECT_EQ(normalize_mod(0, 5), 5);
  EXPECT_EQ(normalize_mod(-1, 5), 4);
  EXPECT_EQ(normalize_mod(7, 5), 2);
  EXPECT_THROW(build_big_modulo({{"x", 1}}, 1, 0), std::invalid_argument);
  EXPECT_THROW(build_big_modulo({{"x", 1}}, 3, 3), std::invalid_argument);
}

TEST(Builders, VanishingModuloCoefficientHasNoTowerInterval) {
  auto bp = build_modulo_combined_small({{"x", 1}, {"y", 0}}, 5, 1);
  EXPECT_EQ(bp.protocol.state_name(bp.inputs[1]), "<-|0>");
  EXPECT_EQ(bp.protocol.state_name(bp.inputs[0]), "<[0,1)|1>");
  auto c = bp.initial_configuration({0, 3});
  EXPECT_TRUE(is_terminal(bp.protocol, c));
  EXPECT_EQ(output_of(bp.protocol, c), Decision::Reject);  // 0 mod 5 < 1
  EXPECT_EQ(bp.protocol.find_state("<-|0>"), bp.inputs[1]);
}

TEST(Builders, BigModuloBelowTwoMIsNotCovered) {
  // fresh agents hold no output bits, so a lone agent rejects although x mod 2 = 1
  auto bp = build_big_modulo({{"x", 1}}, 2, 1);
  auto c = bp.initial_configuration({1});
  EXPECT_TRUE(is_terminal(bp.protocol, c));
  EXPECT_EQ(output_of(bp.protocol, c), Decision::Reject);
  EXPECT_TRUE(bp.eval(c));
}

TEST(Builders, OracleSoundnessAtDeskScale) {
  expect_well_specified("pebbles(3)", 8);
  expect_well_specified("tower(4)", 8);
  expect_well_specified("inhom_tower(x:3,y:2;4)", 6);
  expect_well_specified("weak_convert(gen_majority(x:1,y:-2))", 7);
  expect_well_specified("weak_convert(inhom_tower_cancel(x:2,y:-1;3))", 6);
  expect_well_specified("threshold(x:1,y:-1;0)", 6);
  expect_well_specified("and(tower(2),negate(pebbles(3)))", 6);
  expect_well_specified("modulo_combined_small(x:1;2,1)", 3);
  expect_well_specified("modulo_combined_small(x:1,y:0;5,1)", 5);
}

TEST(Builders, ConservationLawsHoldOnExploredEdges) {
  for (const char* expr : {"pebbles(4)", "tower(4)", "inhom_tower(x:3,y:2;5)", "gen_majority(x:1,y:-2)",
                           "weak_convert(inhom_tower_cancel(x:2,y:-1;3))", "big_modulo(x:1;2,1)",
                           "modulo_combined_small(x:1,y:2;3,1)"}) {
    auto bp = build_from_expression(expr);
    ASSERT_FALSE(bp.invariants.empty()) << expr;
    ExploreOptions opts;
    opts.invariants = &bp.invariants;
    opts.node_budget = 200000;
    const auto max_agents = bp.protocol.state_count() > 1000 ? 3u : 5u;
    std::uint64_t checked = 0;
    for (const auto& c : initial_configurations(bp, max_agents)) {
      SnipeExplorer ex(bp.protocol, c, opts);
      for (std::size_t k = 1; k <= c.size(); ++k) ex.advance();
      EXPECT_EQ(ex.invariant_violations(), 0u) << expr;
      for (const auto& t : ex.invariant_tallies()) checked += t.checked;
    }
    EXPECT_GT(checked, 0u) << expr;
  }
}

TEST(Builders, ExpressionErrorsArePositioned) {
  try {
    build_from_expression("and(tower(3), frob(2))");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_from_expression("tower(3"), std::invalid_argument);
  EXPECT_THROW(build_from_expression("tower(3) x"), std::invalid_argument);
}

TEST(Builders, MaterializeKeepsTheRules) {
  auto bp = build_from_expression("and(tower(3),negate(pebbles(2)))");
  auto table = materialize(bp.protocol);
  EXPECT_EQ(table.state_count(), bp.protocol.state_count());
  for (std::uint64_t i = 0; i < table.state_count(); ++i) {
    EXPECT_EQ(table.opinion(state(i)), bp.protocol.opinion(state(i)));
    for (std::uint64_t j = 0; j < table.state_count(); ++j) {
      auto a = table.transitions_for(state(i), state(j), false);
      auto b = bp.protocol.transitions_for(state(i), state(j), false);
      EXPECT_EQ(a.size(), b.size());
    }
  }
  EXPECT_THROW(materialize(build_big_modulo({{"x", 1}}, 2, 1).protocol, 16), std::length_error);
}
