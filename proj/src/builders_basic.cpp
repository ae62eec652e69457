#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "pp/builders.hpp"

namespace pp {

Configuration BoundProtocol::initial_configuration(std::span<const std::int64_t> x) const {
  if (x.size() != inputs.size()) {
    throw std::invalid_argument("expected " + std::to_string(inputs.size()) + " inputs, got " +
                                std::to_string(x.size()));
  }
  Configuration c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0) throw std::invalid_argument("input counts must be non-negative");
    c.add(inputs[i], static_cast<std::uint32_t>(x[i]));
  }
  return c;
}

std::vector<std::int64_t> BoundProtocol::input_vector(const Configuration& c) const {
  std::vector<std::int64_t> x(inputs.size(), 0);
  for (const auto& e : c.entries()) {
    auto it = std::find(inputs.begin(), inputs.end(), e.state);
    if (it == inputs.end()) {
      throw std::invalid_argument("state '" + protocol.state_name(e.state) + "' is not bound to an input variable");
    }
    x[static_cast<std::size_t>(it - inputs.begin())] += e.count;
  }
  return x;
}

Terms default_terms(std::span<const std::int64_t> coeffs) {
  Terms out;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    std::string name;
    if (coeffs.size() == 1) {
      name = "x";
    } else if (coeffs.size() == 2) {
      name = i == 0 ? "x" : "y";
    } else {
      name = "x" + std::to_string(i + 1);
    }
    out.emplace_back(std::move(name), coeffs[i]);
  }
  return out;
}

std::int64_t normalize_mod(std::int64_t a, std::int64_t m) {
  auto r = a % m;
  if (r <= 0) r += m;
  return r;
}

namespace {

// coefficient of each predicate variable, in variable order
std::vector<std::int64_t> coefficients_by_variable(const Predicate& pred) {
  std::vector<std::int64_t> out;
  for (const auto& v : pred.variables()) {
    for (const auto& [name, a] : pred.terms()) {
      if (name == v) out.push_back(a);
    }
  }
  return out;
}

std::int64_t to_int(const Protocol& p, StateId s) { return std::stoll(p.state_name(s)); }

std::string interval_name(std::int64_t s, std::int64_t e) {
  return "[" + std::to_string(s) + "," + std::to_string(e) + ")";
}

}  // namespace

BoundProtocol build_pebbles(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("pebbles: threshold must be at least 1");
  TableProtocolBuilder b("pebbles(" + std::to_string(t) + ")");
  std::vector<StateId> level;
  for (std::int64_t q = 0; q <= t; ++q) {
    level.push_back(b.add_state(std::to_string(q), q == t ? Opinion::Accept : Opinion::Reject));
  }
  b.add_initial(level[1]);
  for (std::int64_t x = 0; x <= t; ++x) {
    for (std::int64_t y = x; y <= t; ++y) {
      if (x + y < t) {
        b.add_transition(level[x], level[y], level[x + y], level[0]);
      } else {
        b.add_transition(level[x], level[y], level[t], level[t]);
      }
    }
  }
  BoundProtocol out{std::move(b).build(), Predicate::threshold({{"x", 1}}, t), {level[1]}, {}};
  const Protocol p = out.protocol;
  out.invariants.push_back(non_decreasing("total pebbles", [p](StateId s) { return to_int(p, s); }));
  out.invariants.push_back(non_increasing("unsaturated pebbles", [p, t](StateId s) {
    auto q = to_int(p, s);
    return q < t ? q : 0;
  }));
  out.invariants.push_back({"merges conserve pebbles", [p, t](const Transition& tr) {
                              const bool saturating = to_int(p, tr.p_out) == t && to_int(p, tr.q_out) == t;
                              if (tr.silent() || saturating) return true;
                              return to_int(p, tr.p) + to_int(p, tr.q) == to_int(p, tr.p_out) + to_int(p, tr.q_out);
                            }});
  return out;
}

BoundProtocol build_tower(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("tower: threshold must be at least 1");
  TableProtocolBuilder b("tower(" + std::to_string(t) + ")");
  std::vector<StateId> level(static_cast<std::size_t>(t + 1));
  for (std::int64_t q = 1; q <= t; ++q) {
    level[q] = b.add_state(std::to_string(q), q == t ? Opinion::Accept : Opinion::Reject);
  }
  b.add_initial(level[1]);
  for (std::int64_t x = 1; x < t; ++x) b.add_transition(level[x], level[x], level[x], level[x + 1]);
  for (std::int64_t x = 1; x < t; ++x) b.add_transition(level[x], level[t], level[t], level[t]);
  BoundProtocol out{std::move(b).build(), Predicate::threshold({{"x", 1}}, t), {level[1]}, {}};
  const Protocol p = out.protocol;
  out.invariants.push_back(strictly_increasing("level sum increases", [p](StateId s) { return to_int(p, s); }));
  return out;
}

BoundProtocol build_inhom_tower(Terms terms, std::int64_t t) {
  for (const auto& [name, a] : terms) {
    if (a <= 0) throw std::invalid_argument("inhom_tower: coefficient of " + name + " must be positive");
  }
  Predicate pred = Predicate::threshold(terms, t);
  const auto coeffs = coefficients_by_variable(pred);
  std::string name = "inhom_tower(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) name += (i ? "," : "") + std::to_string(coeffs[i]);
  name += ";" + std::to_string(t) + ")";

  if (t <= 0) {
    TableProtocolBuilder b(name);
    auto top = b.add_state("true", Opinion::Accept);
    b.add_initial(top);
    return BoundProtocol{std::move(b).build(), pred, std::vector<StateId>(coeffs.size(), top), {}};
  }

  std::vector<std::int64_t> lengths;
  for (auto a : coeffs) lengths.push_back(std::min(a, t));
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  struct Interval {
    std::int64_t s, e;
  };
  TableProtocolBuilder b(name);
  std::vector<Interval> iv;
  std::map<std::pair<std::int64_t, std::int64_t>, StateId> id;
  for (auto len : lengths) {
    for (std::int64_t s = 0; s + len <= t; ++s) {
      id[{s, s + len}] = b.add_state(interval_name(s, s + len), s + len == t ? Opinion::Accept : Opinion::Reject);
      iv.push_back({s, s + len});
    }
  }
  std::vector<StateId> inputs;
  for (auto a : coeffs) {
    auto q = id.at({0, std::min(a, t)});
    b.add_initial(q);
    inputs.push_back(q);
  }
  for (const auto& x : iv) {
    for (const auto& y : iv) {
      const bool overlap = x.s < y.e && y.s < x.e;
      // step: the interval with the higher (or equal) start moves up
      if (overlap && x.s <= y.s && x.e < t && y.e < t) {
        b.add_transition(id.at({x.s, x.e}), id.at({y.s, y.e}), id.at({x.s, x.e}), id.at({y.s + 1, y.e + 1}));
      }
      // accum: an agent at the top pulls the other up
      if (x.e == t && y.e < t) {
        const auto len = y.e - y.s;
        b.add_transition(id.at({x.s, x.e}), id.at({y.s, y.e}), id.at({x.s, x.e}), id.at({t - len, t}));
      }
    }
  }
  BoundProtocol out{std::move(b).build(), pred, inputs, {}};
  std::vector<std::int64_t> len_of;
  for (const auto& x : iv) len_of.push_back(x.e - x.s);
  out.invariants.push_back(conserved("interval length sum", [len_of](StateId s) { return len_of[index(s)]; }));
  return out;
}

BoundProtocol build_gen_majority(Terms terms) {
  Predicate pred = Predicate::threshold(terms, 1);
  const auto coeffs = coefficients_by_variable(pred);
  const auto [lo, hi] = std::minmax_element(coeffs.begin(), coeffs.end());
  if (coeffs.empty() || *lo >= 0 || *hi <= 0) {
    throw std::invalid_argument("gen_majority: needs both a negative and a positive coefficient");
  }
  std::string name = "gen_majority(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) name += (i ? "," : "") + std::to_string(coeffs[i]);
  name += ")";
  TableProtocolBuilder b(name, OutputKind::Weak);
  const auto a_min = *lo, a_max = *hi;
  auto at = [a_min](std::int64_t v) { return state(static_cast<std::uint64_t>(v - a_min)); };
  for (auto v = a_min; v <= a_max; ++v) {
    b.add_state(std::to_string(v), v > 0 ? Opinion::Accept : v == 0 ? Opinion::Neutral : Opinion::Reject);
  }
  std::vector<StateId> inputs;
  for (auto a : coeffs) {
    b.add_initial(at(a));
    inputs.push_back(at(a));
  }
  for (auto x = a_min; x < 0; ++x) {
    for (std::int64_t y = 1; y <= a_max; ++y) b.add_transition(at(x), at(y), at(x + y), at(0));
  }
  BoundProtocol out{std::move(b).build(), pred, inputs, {}};
  out.invariants.push_back(conserved("value sum", [a_min](StateId s) {
    return static_cast<std::int64_t>(index(s)) + a_min;
  }));
  return out;
}

BoundProtocol build_inhom_tower_cancel(Terms terms, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("inhom_tower_cancel: threshold must be at least 1 (negate first)");
  Predicate pred = Predicate::threshold(terms, t);
  const auto coeffs = coefficients_by_variable(pred);
  if (std::none_of(coeffs.begin(), coeffs.end(), [](auto a) { return a < 0; })) {
    throw std::invalid_argument("inhom_tower_cancel: needs a negative coefficient (use inhom_tower)");
  }
  if (std::any_of(coeffs.begin(), coeffs.end(), [](auto a) { return a == 0; })) {
    throw std::invalid_argument("inhom_tower_cancel: coefficients must be non-zero");
  }
  std::string name = "inhom_tower_cancel(";
  for (std::size_t i = 0; i < coeffs.size(); ++i) name += (i ? "," : "") + std::to_string(coeffs[i]);
  name += ";" + std::to_string(t) + ")";

  const auto T = std::max(t, *std::max_element(coeffs.begin(), coeffs.end()));
  const auto a_min = std::min<std::int64_t>(0, *std::min_element(coeffs.begin(), coeffs.end()));

  TableProtocolBuilder b(name, OutputKind::Weak);
  std::map<std::pair<std::int64_t, std::int64_t>, StateId> tower;
  std::map<std::int64_t, StateId> cancel;
  std::vector<std::int64_t> weight;
  for (std::int64_t s = 0; s < T; ++s) {
    for (auto e = s + 1; e <= T; ++e) {
      tower[{s, e}] = b.add_state(interval_name(s, e), t <= e ? Opinion::Accept : Opinion::Neutral);
      weight.push_back(e - s);
    }
  }
  for (auto x = a_min; x < 0; ++x) {
    cancel[x] = b.add_state(std::to_string(x), Opinion::Reject);
    weight.push_back(x);
  }
  const StateId zero = b.add_state("0", Opinion::Neutral);
  weight.push_back(0);

  auto interval = [&](std::int64_t s, std::int64_t e) { return s == e ? zero : tower.at({s, e}); };
  auto number = [&](std::int64_t x) { return x == 0 ? zero : cancel.at(x); };

  std::vector<StateId> inputs;
  for (auto a : coeffs) {
    auto q = a > 0 ? tower.at({0, a}) : cancel.at(a);
    b.add_initial(q);
    inputs.push_back(q);
  }
  for (const auto& [x, qx] : tower) {
    for (const auto& [y, qy] : tower) {
      const auto [s1, e1] = x;
      const auto [s2, e2] = y;
      if (s1 < e2 && s2 < e1 && s1 <= s2 && e1 < T && e2 < T) {
        b.add_transition(qx, qy, qx, tower.at({s2 + 1, e2 + 1}));
      }
    }
  }
  for (const auto& [x, qx] : tower) {
    const auto [s, e] = x;
    if (e < t) continue;
    for (const auto& [v, qv] : cancel) b.add_transition(qx, qv, interval(s, e - 1), number(v + 1));
  }
  BoundProtocol out{std::move(b).build(), pred, inputs, {}};
  out.invariants.push_back(conserved("signed sum", [weight](StateId s) { return weight[index(s)]; }));
  return out;
}

Protocol materialize(const Protocol& p, std::uint64_t limit) {
  const auto n = p.state_count();
  if (n > limit) {
    throw std::length_error(p.name() + " has " + std::to_string(n) + " states; table limit is " +
                            std::to_string(limit));
  }
  TableProtocolBuilder b(p.name(), p.output_kind());
  for (std::uint64_t i = 0; i < n; ++i) b.add_state(p.state_name(state(i)), p.opinion(state(i)));
  for (StateId s : p.initial_states()) b.add_initial(s);
  std::vector<Transition> rules;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = i; j < n; ++j) {
      rules.clear();
      p.rules(state(i), state(j), rules);
      for (const auto& t : rules) b.add_transition(t.p, t.q, t.p_out, t.q_out);
    }
  }
  return std::move(b).build();
}

}  // namespace pp
