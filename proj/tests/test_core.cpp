#include <gtest/gtest.h>

#include <random>

#include "pp/builders.hpp"
#include "pp/configuration.hpp"
#include "pp/predicate.hpp"
#include "pp/protocol.hpp"

using namespace pp;

namespace {

Configuration of(const Protocol& p, std::initializer_list<std::pair<const char*, std::uint32_t>> counts) {
  Configuration c;
  for (const auto& [name, n] : counts) c.add(p.state_named(name), n);
  return c;
}

// a, a -> b, b and a, a -> c, c with b accepting and c rejecting
Protocol fork_protocol() {
  TableProtocolBuilder b("fork");
  auto a = b.add_state("a", Opinion::Reject);
  auto yes = b.add_state("b", Opinion::Accept);
  auto no = b.add_state("c", Opinion::Reject);
  b.add_initial(a);
  b.add_transition(a, a, yes, yes);
  b.add_transition(a, a, no, no);
  return std::move(b).build();
}

}  // namespace

TEST(Configuration, CanonicalForm) {
  std::vector<std::pair<StateId, std::uint32_t>> raw{{state(3), 1}, {state(1), 0}, {state(3), 2}, {state(0), 1}};
  auto c = Configuration::from_counts(raw);
  ASSERT_EQ(c.entries().size(), 2u);
  EXPECT_EQ(c.count(state(3)), 3u);
  EXPECT_EQ(c.count(state(1)), 0u);
  EXPECT_EQ(c.size(), 4u);
  Configuration d{{state(0), 1}, {state(3), 3}};
  EXPECT_EQ(c, d);
  EXPECT_EQ(c.hash(), d.hash());
  EXPECT_EQ(c.canonical_bytes(), d.canonical_bytes());
}

TEST(Configuration, AddRemoveAndOrder) {
  Configuration c;
  EXPECT_TRUE(c.empty());
  c.add(state(2), 2);
  c.add(state(1));
  c.remove(state(2));
  EXPECT_EQ(c.count(state(2)), 1u);
  c.remove(state(2));
  EXPECT_EQ(c.entries().size(), 1u);
  EXPECT_THROW(c.remove(state(2)), std::out_of_range);
  EXPECT_THROW(c.remove(state(1), 2), std::out_of_range);

  Configuration big{{state(1), 2}, {state(4), 1}};
  EXPECT_TRUE(c.is_sub_multiset_of(big));
  EXPECT_FALSE(big.is_sub_multiset_of(c));
  EXPECT_EQ((c + c).count(state(1)), 2u);
}

TEST(Configuration, HashAgreesWithEqualityOnRandomMultisets) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<StateId, std::uint32_t>> counts;
    for (int k = 0; k < 6; ++k) counts.emplace_back(state(rng() % 5), static_cast<std::uint32_t>(rng() % 3));
    auto a = Configuration::from_counts(counts);
    std::shuffle(counts.begin(), counts.end(), rng);
    auto b = Configuration::from_counts(counts);
    ASSERT_EQ(a, b);
    ASSERT_EQ(a.hash(), b.hash());
  }
}

TEST(Semantics, OutputOfExamples) {
  auto gm = build_gen_majority(default_terms({1, -2}));
  const auto& P = gm.protocol;
  EXPECT_EQ(output_of(P, of(P, {{"1", 1}, {"0", 3}})), Decision::Accept);
  EXPECT_EQ(output_of(P, of(P, {{"0", 4}})), Decision::Reject);  // only neutral agents
  EXPECT_EQ(output_of(P, of(P, {{"1", 1}, {"-1", 1}})), Decision::Undecided);

  auto tower = build_tower(4).protocol;
  EXPECT_EQ(output_of(tower, of(tower, {{"2", 1}, {"3", 1}})), Decision::Reject);
  EXPECT_EQ(output_of(tower, of(tower, {{"2", 1}, {"4", 1}})), Decision::Undecided);
  EXPECT_EQ(output_of(tower, of(tower, {{"4", 3}})), Decision::Accept);
  EXPECT_EQ(output_of(tower, Configuration{}), Decision::Reject);
  EXPECT_EQ(output_of(P, Configuration{}), Decision::Reject);
}

TEST(Semantics, MoveAndSnipe) {
  auto P = build_tower(4).protocol;
  auto c = of(P, {{"1", 3}});
  auto moves = enabled_transitions(P, c, false);
  ASSERT_EQ(moves.size(), 1u);
  auto d = apply_move(P, c, moves[0]);
  EXPECT_EQ(d, of(P, {{"1", 2}, {"2", 1}}));
  EXPECT_EQ(d.size(), c.size());

  // 2, 2 -> 2, 3 is not enabled with a single agent in 2
  Transition t{P.state_named("2"), P.state_named("2"), P.state_named("2"), P.state_named("3")};
  EXPECT_THROW(apply_move(P, d, t), std::invalid_argument);
  // 1, 1 -> 4, 4 is not a rule
  Transition fake{P.state_named("1"), P.state_named("1"), P.state_named("4"), P.state_named("4")};
  EXPECT_THROW(apply_move(P, c, fake), std::invalid_argument);

  EXPECT_EQ(apply_snipe(c, P.state_named("1")), of(P, {{"1", 2}}));
  EXPECT_THROW(apply_snipe(c, P.state_named("4")), std::invalid_argument);
}

TEST(Semantics, TerminalConfigurations) {
  auto P = build_tower(3).protocol;
  EXPECT_TRUE(is_terminal(P, of(P, {{"3", 3}})));
  EXPECT_FALSE(is_terminal(P, of(P, {{"1", 2}})));
  EXPECT_TRUE(is_terminal(P, of(P, {{"1", 1}})));  // no pair at all
  EXPECT_TRUE(is_terminal(P, Configuration{}));
}

TEST(Semantics, SilentCompletion) {
  auto P = build_tower(3).protocol;
  // 1, 3 has a rule; 3, 3 is uncovered and gets the identity
  auto ident = P.transitions_for(P.state_named("3"), P.state_named("3"), true);
  ASSERT_EQ(ident.size(), 1u);
  EXPECT_TRUE(ident[0].silent());
  EXPECT_TRUE(is_rule(P, ident[0]));
  EXPECT_TRUE(P.transitions_for(P.state_named("3"), P.state_named("3"), false).empty());
}

TEST(Semantics, NondeterministicPairsReportEveryRule) {
  auto P = fork_protocol();
  auto c = of(P, {{"a", 2}});
  EXPECT_EQ(enabled_transitions(P, c, false).size(), 2u);
  std::vector<Configuration> succ;
  std::vector<Transition> scratch;
  for_each_move(P, c, scratch, [&](const Transition&, Configuration d) { succ.push_back(std::move(d)); });
  ASSERT_EQ(succ.size(), 2u);
  EXPECT_NE(succ[0], succ[1]);
}

TEST(Semantics, MovesPreserveSizeOnRandomWalks) {
  std::mt19937_64 rng(5);
  for (const char* expr : {"pebbles(4)", "tower(4)", "weak_convert(gen_majority(x:2,y:-3))",
                           "and(tower(2),negate(pebbles(3)))"}) {
    auto bp = build_from_expression(expr);
    const auto n = static_cast<std::int64_t>(bp.inputs.size());
    std::vector<std::int64_t> x(static_cast<std::size_t>(n), 3);
    auto c = bp.initial_configuration(x);
    for (int step = 0; step < 100; ++step) {
      auto moves = enabled_transitions(bp.protocol, c, false);
      if (moves.empty()) break;
      auto d = apply_move(bp.protocol, c, moves[rng() % moves.size()]);
      ASSERT_EQ(d.size(), c.size()) << expr;
      c = d;
    }
  }
}

TEST(Audit, CatalogProtocolsAreClean) {
  for (const char* expr : {"pebbles(3)", "tower(5)", "inhom_tower(x:3,y:2;4)", "gen_majority(x:1,y:-2)",
                           "inhom_tower_cancel(x:2,y:-1;3)", "weak_convert(gen_majority(x:1,y:-2))",
                           "threshold(x:1,y:-1;0)", "big_modulo(x:1;2,1)", "modulo_combined_small(x:1;2,1)"}) {
    auto bp = build_from_expression(expr);
    EXPECT_TRUE(audit(bp.protocol).empty()) << expr;
  }
}

TEST(Predicate, EvalExamples) {
  auto maj = Predicate::threshold({{"x", 1}, {"y", -2}}, 1);
  EXPECT_TRUE(maj.eval({3, 1}));
  EXPECT_FALSE(maj.eval({2, 1}));
  auto mod = Predicate::modulo({{"x", 1}, {"y", -1}}, 3, 1);
  EXPECT_TRUE(mod.eval({0, 1}));  // -1 mod 3 = 2
  EXPECT_FALSE(mod.eval({4, 1}));
  auto both = Predicate::conjunction(maj, Predicate::negation(Predicate::threshold({{"z", 1}}, 2)));
  EXPECT_EQ(both.variables(), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_TRUE(both.eval({3, 1, 1}));
  EXPECT_FALSE(both.eval({3, 1, 2}));
  EXPECT_THROW(maj.eval({1}), std::invalid_argument);
  EXPECT_THROW(maj.eval({1, -1}), std::invalid_argument);
}

TEST(Predicate, ParseRoundTrip) {
  std::vector<Predicate> preds{
      Predicate::threshold({{"x", 2}, {"y", -1}}, 3),
      Predicate::modulo({{"x", 1}, {"y", 0}}, 5, 1),
      Predicate::disjunction(Predicate::threshold({{"x", 1}, {"y", -1}}, 0),
                             Predicate::conjunction(Predicate::threshold({{"x", 1}, {"y", -1}}, -1),
                                                    Predicate::negation(Predicate::modulo({{"x", 1}}, 5, 1)))),
  };
  std::mt19937_64 rng(3);
  for (const auto& p : preds) {
    auto q = Predicate::parse(p.to_string());
    EXPECT_EQ(p, q);
    for (int k = 0; k < 50; ++k) {
      std::vector<std::int64_t> x;
      for (std::size_t j = 0; j < p.arity(); ++j) x.push_back(static_cast<std::int64_t>(rng() % 12));
      ASSERT_EQ(p.eval(x), q.eval(x));
    }
  }
  EXPECT_THROW(Predicate::parse("(>= (+ x) "), std::invalid_argument);
  EXPECT_EQ(Predicate::parse("(>= (+ x y) 1)"), Predicate::threshold({{"x", 1}, {"y", 1}}, 1));
  try {
    Predicate::parse("(> (+ x y) 1)");
    FAIL() << "unknown operator accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
}
