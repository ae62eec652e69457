#include "pp/protocol_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pp {

using nlohmann::json;

namespace {

constexpr std::string_view kTimes = "×";
constexpr std::string_view kEmpty = "∅";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path.empty() ? "/" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? "/" : path, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string string_at(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const json& array_at(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

// "count×name" or a bare name.
std::pair<std::uint32_t, std::string> split_entry(std::string_view item, const std::string& where) {
  item = trim(item);
  auto cut = item.find(kTimes);
  auto width = kTimes.size();
  if (cut == std::string_view::npos) {
    cut = item.find('*');
    width = 1;
  }
  if (cut == std::string_view::npos) return {1, std::string(item)};
  const auto digits = trim(item.substr(0, cut));
  std::uint32_t count = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    fail(where, "bad count \"" + std::string(digits) + "\"");
  }
  return {count, std::string(trim(item.substr(cut + width)))};
}

StateId lookup(const Protocol& p, const std::string& name, const std::string& where) {
  if (auto s = p.find_state(name)) return *s;
  fail(where, "unknown state \"" + name + "\"");
}

json transition_json(const Protocol& p, const Transition& t) {
  return json::array({p.state_name(t.p), p.state_name(t.q), p.state_name(t.p_out), p.state_name(t.q_out)});
}

Transition transition_from_json(const Protocol& p, const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) fail(path, "expected [p, q, p', q']");
  StateId s[4];
  for (std::size_t i = 0; i < 4; ++i) {
    s[i] = lookup(p, string_at(j[i], path + "/" + std::to_string(i)), path + "/" + std::to_string(i));
  }
  return Transition{s[0], s[1], s[2], s[3]};
}

}  // namespace

std::optional<BoundProtocol> ProtocolDocument::bound() const {
  if (!predicate || inputs.size() != predicate->arity()) return std::nullopt;
  return BoundProtocol{protocol, *predicate, inputs, {}};
}

json protocol_to_json(const Protocol& p, std::uint64_t limit) {
  const Protocol table = p.table() ? p : materialize(p, limit);
  json doc;
  doc["name"] = p.name();
  json states = json::array(), acc = json::array(), neu = json::array(), rej = json::array(), init = json::array();
  for (std::uint64_t i = 0; i < table.state_count(); ++i) {
    const auto s = state(i);
    const auto name = table.state_name(s);
    states.push_back(name);
    switch (table.opinion(s)) {
      case Opinion::Accept: acc.push_back(name); break;
      case Opinion::Neutral: neu.push_back(name); break;
      case Opinion::Reject: rej.push_back(name); break;
    }
  }
  for (auto s : table.initial_states()) init.push_back(table.state_name(s));
  doc["states"] = std::move(states);
  doc["initial"] = std::move(init);
  doc["output"] = {{"kind", std::string(to_string(table.output_kind()))},
                   {"accepting", std::move(acc)},
                   {"neutral", std::move(neu)},
                   {"rejecting", std::move(rej)}};
  json ts = json::array();
  for (const auto& t : *table.table()) {
    if (!t.silent()) ts.push_back(transition_json(table, t));
  }
  doc["transitions"] = std::move(ts);
  return doc;
}

json protocol_to_json(const BoundProtocol& bp, std::uint64_t limit) {
  auto doc = protocol_to_json(bp.protocol, limit);
  doc["predicate"] = bp.predicate.to_string();
  json inputs = json::array();
  for (std::size_t i = 0; i < bp.inputs.size(); ++i) {
    inputs.push_back({{"variable", bp.predicate.variables()[i]}, {"state", bp.protocol.state_name(bp.inputs[i])}});
  }
  doc["inputs"] = std::move(inputs);
  return doc;
}

ProtocolDocument parse_protocol(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail("byte " + std::to_string(e.byte), "malformed JSON");
  }
  return protocol_from_json(doc);
}

ProtocolDocument protocol_from_json(const json& doc) {
  const auto name = string_at(member(doc, "", "name"), "/name");
  const auto& output = member(doc, "", "output");
  const auto kind_name = string_at(member(output, "/output", "kind"), "/output/kind");
  OutputKind kind;
  if (kind_name == "consensus") {
    kind = OutputKind::Consensus;
  } else if (kind_name == "weak") {
    kind = OutputKind::Weak;
  } else {
    fail("/output/kind", "expected \"consensus\" or \"weak\"");
  }

  const auto& states = array_at(member(doc, "", "states"), "/states");
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto path = "/states/" + std::to_string(i);
    if (!position.emplace(string_at(states[i], path), i).second) fail(path, "duplicate state \"" + states[i].get<std::string>() + "\"");
  }

  // every state in exactly one output set
  std::vector<std::optional<Opinion>> opinion(states.size());
  const std::pair<const char*, Opinion> sets[] = {
      {"accepting", Opinion::Accept}, {"neutral", Opinion::Neutral}, {"rejecting", Opinion::Reject}};
  for (const auto& [key, op] : sets) {
    const auto path = std::string("/output/") + key;
    if (!output.contains(key)) {
      if (op == Opinion::Neutral) continue;
      fail("/output", std::string("missing field \"") + key + "\"");
    }
    const auto& list = array_at(output[key], path);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto where = path + "/" + std::to_string(i);
      const auto s = string_at(list[i], where);
      auto it = position.find(s);
      if (it == position.end()) fail(where, "unknown state \"" + s + "\"");
      if (opinion[it->second]) fail(where, "state \"" + s + "\" is in more than one output set");
      opinion[it->second] = op;
    }
  }
  TableProtocolBuilder b(name, kind);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto s = states[i].get<std::string>();
    if (!opinion[i]) fail("/output", "state \"" + s + "\" is in no output set");
    if (kind == OutputKind::Consensus && *opinion[i] == Opinion::Neutral) {
      fail("/output/neutral", "consensus protocols have no neutral states");
    }
    b.add_state(s, *opinion[i]);
  }

  auto state_at = [&](const json& j, const std::string& path) {
    const auto s = string_at(j, path);
    auto id = b.find_state(s);
    if (!id) fail(path, "unknown state \"" + s + "\"");
    return *id;
  };
  const auto& init = array_at(member(doc, "", "initial"), "/initial");
  for (std::size_t i = 0; i < init.size(); ++i) b.add_initial(state_at(init[i], "/initial/" + std::to_string(i)));
  const auto& ts = array_at(member(doc, "", "transitions"), "/transitions");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto path = "/transitions/" + std::to_string(i);
    if (!ts[i].is_array() || ts[i].size() != 4) fail(path, "expected [p, q, p', q']");
    StateId s[4];
    for (std::size_t k = 0; k < 4; ++k) s[k] = state_at(ts[i][k], path + "/" + std::to_string(k));
    b.add_transition(s[0], s[1], s[2], s[3]);
  }

  ProtocolDocument out{std::move(b).build(), std::nullopt, {}};
  if (doc.contains("predicate")) {
    const auto text = string_at(doc["predicate"], "/predicate");
    try {
      out.predicate = Predicate::parse(text);
    } catch (const std::invalid_argument& e) {
      fail("/predicate", e.what());
    }
  }
  if (doc.contains("inputs")) {
    if (!out.predicate) fail("/inputs", "inputs require a predicate");
    const auto& inputs = array_at(doc["inputs"], "/inputs");
    const auto& vars = out.predicate->variables();
    out.inputs.assign(vars.size(), StateId{});
    std::vector<bool> seen(vars.size(), false);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto path = "/inputs/" + std::to_string(i);
      const auto var = string_at(member(inputs[i], path, "variable"), path + "/variable");
      auto it = std::find(vars.begin(), vars.end(), var);
      if (it == vars.end()) fail(path + "/variable", "predicate has no variable \"" + var + "\"");
      const auto s = lookup(out.protocol, string_at(member(inputs[i], path, "state"), path + "/state"), path + "/state");
      if (!out.protocol.is_initial(s)) fail(path + "/state", "state \"" + out.protocol.state_name(s) + "\" is not initial");
      const auto k = static_cast<std::size_t>(it - vars.begin());
      out.inputs[k] = s;
      seen[k] = true;
    }
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (!seen[k]) fail("/inputs", "variable \"" + vars[k] + "\" is not bound");
    }
  }
  if (auto problems = audit(out.protocol); !problems.empty()) fail("/", problems.front());
  return out;
}

ProtocolDocument parse_protocol_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_protocol(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

json configuration_to_json(const Protocol& p, const Configuration& c) {
  json out = json::array();
  for (const auto& e : c.entries()) out.push_back(std::to_string(e.count) + std::string(kTimes) + p.state_name(e.state));
  return out;
}

Configuration configuration_from_json(const Protocol& p, const json& j) {
  if (!j.is_array()) throw FormatError("configuration: expected an array of \"count×name\" strings");
  Configuration c;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto where = "configuration entry " + std::to_string(i);
    if (!j[i].is_string()) fail(where, "expected a string");
    const auto [count, name] = split_entry(j[i].get<std::string>(), where);
    if (count > 0) c.add(lookup(p, name, where), count);
  }
  return c;
}

std::string format_configuration(const Protocol& p, const Configuration& c) {
  if (c.empty()) return std::string(kEmpty);
  std::string out;
  for (const auto& e : c.entries()) {
    if (!out.empty()) out += ", ";
    out += std::to_string(e.count) + std::string(kTimes) + p.state_name(e.state);
  }
  return out;
}

Configuration parse_configuration(const Protocol& p, std::string_view text) {
  text = trim(text);
  Configuration c;
  if (text.empty() || text == kEmpty) return c;
  // split at commas outside brackets; state names such as "[0,2)" or "(a,b)"
  // contain commas themselves
  int depth = 0;
  std::size_t start = 0;
  auto take = [&](std::size_t end) {
    const auto where = "offset " + std::to_string(start);
    const auto [count, name] = split_entry(text.substr(start, end - start), where);
    if (name.empty()) fail(where, "empty state name");
    if (count > 0) c.add(lookup(p, name, where), count);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '(' || ch == '[' || ch == '<') ++depth;
    if (ch == ')' || ch == ']' || ch == '>') --depth;
    if (ch == ',' && depth == 0) {
      take(i);
      start = i + 1;
    }
  }
  take(text.size());
  return c;
}

json trace_to_json(const Protocol& p, const ExecutionTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json step;
    if (s.label.kind == StepLabel::Kind::Move) {
      step = {{"kind", "move"}, {"transition", transition_json(p, s.label.transition)}};
      if (s.label.transition.id != kNoTransitionId) step["id"] = s.label.transition.id;
    } else {
      step = {{"kind", "snipe"}, {"state", p.state_name(s.label.sniped)}};
    }
    steps.push_back({{"step", std::move(step)}, {"config", configuration_to_json(p, s.config)}});
  }
  return {{"start", configuration_to_json(p, t.start)},
          {"steps", std::move(steps)},
          {"snipes", t.snipe_count()},
          {"terminal", t.terminal}};
}

ExecutionTrace trace_from_json(const Protocol& p, const json& j) {
  ExecutionTrace t;
  t.start = configuration_from_json(p, member(j, "", "start"));
  const auto& steps = array_at(member(j, "", "steps"), "/steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto path = "/steps/" + std::to_string(i);
    const auto& step = member(steps[i], path, "step");
    const auto kind = string_at(member(step, path + "/step", "kind"), path + "/step/kind");
    TraceStep ts;
    if (kind == "move") {
      auto tr = transition_from_json(p, member(step, path + "/step", "transition"), path + "/step/transition");
      if (step.contains("id")) tr.id = step["id"].get<TransitionId>();
      ts.label = StepLabel::move(tr);
    } else if (kind == "snipe") {
      ts.label = StepLabel::snipe(
          lookup(p, string_at(member(step, path + "/step", "state"), path + "/step/state"), path + "/step/state"));
    } else {
      fail(path + "/step/kind", "expected \"move\" or \"snipe\"");
    }
    ts.config = configuration_from_json(p, member(steps[i], path, "config"));
    t.steps.push_back(std::move(ts));
  }
  if (j.contains("terminal")) t.terminal = j["terminal"].get<bool>();
  return t;
}

std::string trace_to_jsonl(const Protocol& p, const ExecutionTrace& t) {
  const auto doc = trace_to_json(p, t);
  std::string out = json{{"index", 0}, {"step", nullptr}, {"config", doc["start"]}}.dump() + "\n";
  for (std::size_t i = 0; i < doc["steps"].size(); ++i) {
    const auto& s = doc["steps"][i];
    out += json{{"index", i + 1}, {"step", s["step"]}, {"config", s["config"]}}.dump() + "\n";
  }
  return out;
}

json tolerance_to_json(const Tolerance& t) {
  if (t.unbounded) return "unbounded";
  return t.value;
}

json report_to_json(const BoundProtocol& bp, const ToleranceReport& r) {
  const auto& p = bp.protocol;
  json input = json::object();
  for (std::size_t i = 0; i < r.input.size() && i < bp.predicate.arity(); ++i) {
    input[bp.predicate.variables()[i]] = r.input[i];
  }
  json invariants = json::object();
  for (const auto& t : r.invariants) invariants[t.name] = {{"checked", t.checked}, {"violated", t.violated}};
  json out = {{"config", configuration_to_json(p, r.config)},
              {"input", std::move(input)},
              {"predicate", r.expected},
              {"out0", std::string(to_string(r.out0))},
              {"well_specified", r.well_specified},
              {"intol", tolerance_to_json(r.intol)},
              {"intol_value", r.intol.value},
              {"robust", r.robust},
              {"nodes", r.nodes},
              {"invariants", std::move(invariants)}};
  if (r.tol) {
    out["tol"] = tolerance_to_json(*r.tol);
    out["tol_value"] = r.tol->value;
  } else {
    out["tol"] = nullptr;
  }
  out["counterexample"] = r.counterexample ? trace_to_json(p, *r.counterexample) : json(nullptr);
  if (!r.error.empty()) out["error"] = r.error;
  return out;
}

}  // namespace pp
