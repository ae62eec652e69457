#include <gtest/gtest.h>

#include <regex>

#include "pp/dot.hpp"
#include "pp/protocol_io.hpp"

using namespace pp;
using nlohmann::json;

namespace {

json tiny_doc() {
  return json::parse(R"({
    "name": "tiny",
    "states": ["a", "b"],
    "initial": ["a"],
    "output": {"kind": "consensus", "accepting": ["b"], "rejecting": ["a"]},
    "transitions": [["a", "a", "a", "b"]]
  })");
}

std::string error_of(const json& doc) {
  try {
    protocol_from_json(doc);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

std::size_t count_matches(const std::string& text, const std::string& pattern) {
  std::regex re(pattern);
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re),
                                                 std::sregex_iterator()));
}

}  // namespace

TEST(ProtocolIO, TowerRoundTrip) {
  auto bp = build_tower(4);
  auto doc = protocol_to_json(bp);
  auto back = parse_protocol(doc.dump());
  EXPECT_EQ(back.protocol.name(), bp.protocol.name());
  ASSERT_EQ(back.protocol.state_count(), bp.protocol.state_count());
  for (std::uint64_t i = 0; i < bp.protocol.state_count(); ++i) {
    auto s = back.protocol.state_named(bp.protocol.state_name(state(i)));
    EXPECT_EQ(back.protocol.opinion(s), bp.protocol.opinion(state(i)));
  }
  EXPECT_EQ(protocol_to_json(back.protocol), protocol_to_json(bp.protocol));
  auto bound = back.bound();
  ASSERT_TRUE(bound);
  EXPECT_EQ(bound->predicate, bp.predicate);
  EXPECT_EQ(bound->initial_configuration({5}), bp.initial_configuration({5}));
}

TEST(ProtocolIO, ImplicitProtocolsSerializeAsTables) {
  auto bp = build_from_expression("and(tower(2),negate(pebbles(3)))");
  auto back = protocol_from_json(protocol_to_json(bp));
  ASSERT_TRUE(back.bound());
  EXPECT_EQ(back.protocol.state_count(), bp.protocol.state_count());
  EXPECT_EQ(back.bound()->predicate, bp.predicate);
}

TEST(ProtocolIO, PositionedErrors) {
  auto doc = tiny_doc();
  doc["transitions"][0][3] = "zz";
  auto msg = error_of(doc);
  EXPECT_NE(msg.find("/transitions/0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("\"zz\""), std::string::npos) << msg;

  doc = tiny_doc();
  doc["output"]["rejecting"] = json::array();
  msg = error_of(doc);
  EXPECT_NE(msg.find("no output set"), std::string::npos) << msg;

  doc = tiny_doc();
  doc["output"]["rejecting"].push_back("b");
  EXPECT_NE(error_of(doc).find("more than one output set"), std::string::npos);

  doc = tiny_doc();
  doc["states"].push_back("a");
  EXPECT_NE(error_of(doc).find("duplicate state"), std::string::npos);

  doc = tiny_doc();
  doc["output"]["neutral"] = json::array({"b"});
  doc["output"]["accepting"] = json::array();
  EXPECT_NE(error_of(doc).find("neutral"), std::string::npos);

  doc = tiny_doc();
  doc.erase("initial");
  EXPECT_NE(error_of(doc).find("missing field \"initial\""), std::string::npos);

  try {
    parse_protocol("{\"name\": ");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("byte ", 0), 0u) << e.what();
  }
  EXPECT_THROW(parse_protocol_file("/nonexistent/protocol.json"), FormatError);
}

TEST(ProtocolIO, InputsMustBeInitial) {
  auto doc = tiny_doc();
  doc["predicate"] = "(>= (+ x) 2)";
  doc["inputs"] = json::array({json{{"variable", "x"}, {"state", "b"}}});
  EXPECT_NE(error_of(doc).find("not initial"), std::string::npos);
  doc["inputs"][0]["state"] = "a";
  auto ok = protocol_from_json(doc);
  ASSERT_TRUE(ok.bound());
  EXPECT_TRUE(ok.bound()->eval(ok.bound()->initial_configuration({2})));
}

TEST(ProtocolIO, SignedNumbersFile) {
  auto doc = parse_protocol_file(std::string(PP_DATA_DIR) + "/signed_numbers.json");
  EXPECT_EQ(doc.protocol.state_count(), 5u);
  EXPECT_EQ(doc.protocol.table()->size(), 6u);
  auto bp = doc.bound();
  ASSERT_TRUE(bp);
  auto reports = check_robustness(*bp, 6);
  for (const auto& r : reports) EXPECT_TRUE(r.robust);
  EXPECT_FALSE(reports.empty());
}

TEST(ConfigurationIO, FormatAndParse) {
  auto P = build_tower(4).protocol;
  Configuration c;
  c.add(P.state_named("1"), 3);
  c.add(P.state_named("4"), 2);
  EXPECT_EQ(format_configuration(P, c), "3×1, 2×4");
  EXPECT_EQ(parse_configuration(P, "3×1, 2×4"), c);
  EXPECT_EQ(parse_configuration(P, "2*4,3*1"), c);
  EXPECT_EQ(parse_configuration(P, "1, 1, 1, 2×4"), c);
  EXPECT_EQ(format_configuration(P, Configuration{}), "∅");
  EXPECT_EQ(configuration_from_json(P, configuration_to_json(P, c)), c);
  EXPECT_THROW(parse_configuration(P, "3×9"), FormatError);

  // product states contain commas
  auto prod = build_from_expression("and(tower(2),tower(3))").protocol;
  Configuration d;
  d.add(prod.state_named("(1,2)"), 2);
  EXPECT_EQ(parse_configuration(prod, format_configuration(prod, d)), d);
}

TEST(TraceIO, RoundTrip) {
  auto bp = build_pebbles(3);
  auto r = analyze(bp, bp.initial_configuration({4}));
  ASSERT_TRUE(r.counterexample);
  auto j = trace_to_json(bp.protocol, *r.counterexample);
  auto back = trace_from_json(bp.protocol, j);
  EXPECT_EQ(back.start, r.counterexample->start);
  EXPECT_EQ(back.final_config(), r.counterexample->final_config());
  EXPECT_EQ(back.snipe_count(), 1u);
  EXPECT_EQ(replay(bp.protocol, back), back.final_config());

  auto lines = trace_to_jsonl(bp.protocol, *r.counterexample);
  EXPECT_EQ(static_cast<std::size_t>(std::count(lines.begin(), lines.end(), '\n')),
            r.counterexample->steps.size() + 1);  // start line first

  auto report = report_to_json(bp, r);
  EXPECT_EQ(report["robust"], false);
  EXPECT_EQ(report["intol"], 1);
  EXPECT_EQ(tolerance_to_json(Tolerance{3, true}), "unbounded");
}

TEST(Dot, TowerPlacesAndBoxes) {
  auto dot = export_dot(build_tower(4).protocol);
  EXPECT_EQ(count_matches(dot, R"(\n  p\d+ \[label=)"), 4u);
  EXPECT_EQ(count_matches(dot, R"(\bt\d+ \[shape=box)"), 6u);
  EXPECT_EQ(count_matches(dot, "doublecircle"), 1u);
  EXPECT_NE(dot.find("[label=\"2\"]"), std::string::npos);
}

TEST(Dot, SilentOnlyProtocolHasPlacesOnly) {
  TableProtocolBuilder b("idle");
  auto a = b.add_state("a", Opinion::Accept);
  b.add_state("r", Opinion::Reject);
  b.add_initial(a);
  b.add_transition(a, a, a, a);
  auto dot = export_dot(std::move(b).build());
  EXPECT_EQ(count_matches(dot, R"(\n  p\d+ \[label=)"), 2u);
  EXPECT_EQ(count_matches(dot, "shape=box"), 0u);
}

TEST(Dot, PebblesIncidenceMatchesTheTable) {
  auto P = build_pebbles(4).protocol;
  auto dot = export_dot(P);
  const auto mat = materialize(P);
  const auto& table = *mat.table();
  EXPECT_EQ(count_matches(dot, R"(\bt\d+ \[shape=box)"), table.size());
  // every arc line "pX -> tK" / "tK -> pX" accounts for one or two tokens
  std::size_t tokens = 0;
  for (const auto& line : {std::string(R"(p\d+ -> t\d+;)"), std::string(R"(t\d+ -> p\d+;)")}) {
    tokens += count_matches(dot, line);
  }
  tokens += 2 * count_matches(dot, R"(-> [pt]\d+ \[label="2"\])");
  EXPECT_EQ(tokens, 4 * table.size());
}
