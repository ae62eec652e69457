#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "pp/builders.hpp"

namespace pp {

namespace {

constexpr int kMaxCopies = 14;  // m <= 7 keeps ids within 64 bits

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("state space does not fit in 64-bit ids");
  }
  return a * b;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class BigModuloModel final : public ProtocolModel {
 public:
  struct Agent {
    int leader = 0;  // 0 = non-leader, else copy 1..2m
    std::array<std::uint8_t, kMaxCopies> v{};
    std::uint32_t r = 0;  // bit k-1 is the output bit of copy k
  };

  BigModuloModel(std::string name, std::int64_t m, std::int64_t t, std::vector<std::int64_t> coeffs)
      : name_(std::move(name)), m_(static_cast<int>(m)), copies_(2 * static_cast<int>(m)), t_(t) {
    pow_m_ = 1;
    for (int k = 0; k < copies_; ++k) pow_m_ = checked_mul(pow_m_, m_);
    pow_2_ = std::uint64_t{1} << copies_;
    count_ = checked_mul(checked_mul(static_cast<std::uint64_t>(copies_ + 1), pow_m_), pow_2_);
    for (auto a : coeffs) {
      Agent x;
      x.v.fill(0);
      for (int k = 0; k < copies_; ++k) x.v[k] = static_cast<std::uint8_t>(a % m_);
      inputs_.push_back(encode(x));
    }
  }

  int modulus() const { return m_; }
  int copies() const { return copies_; }
  const std::vector<StateId>& inputs() const { return inputs_; }

  Agent decode(StateId s) const {
    auto i = index(s);
    Agent a;
    a.r = static_cast<std::uint32_t>(i % pow_2_);
    i /= pow_2_;
    auto code = i % pow_m_;
    a.leader = static_cast<int>(i / pow_m_);
    for (int k = 0; k < copies_; ++k) {
      a.v[k] = static_cast<std::uint8_t>(code % m_);
      code /= m_;
    }
    return a;
  }

  StateId encode(const Agent& a) const {
    std::uint64_t code = 0;
    for (int k = copies_ - 1; k >= 0; --k) code = code * m_ + a.v[k];
    return state((static_cast<std::uint64_t>(a.leader) * pow_m_ + code) * pow_2_ + a.r);
  }

  std::string name() const override { return name_; }
  std::uint64_t state_count() const override { return count_; }

  std::string state_name(StateId s) const override {
    const auto a = decode(s);
    std::string out = "(" + std::to_string(a.leader) + ";";
    for (int k = 0; k < copies_; ++k) out += (k ? "," : "") + std::to_string(a.v[k]);
    out += ";";
    for (int k = 0; k < copies_; ++k) out += ((a.r >> k) & 1U) ? '1' : '0';
    return out + ")";
  }

  std::optional<StateId> find_state(std::string_view name) const override {
    if (name.size() < 2 || name.front() != '(' || name.back() != ')') return std::nullopt;
    auto body = name.substr(1, name.size() - 2);
    auto a1 = body.find(';');
    auto a2 = body.find(';', a1 == std::string_view::npos ? a1 : a1 + 1);
    if (a1 == std::string_view::npos || a2 == std::string_view::npos) return std::nullopt;
    Agent a;
    auto leader = parse_int(body.substr(0, a1));
    if (!leader || *leader < 0 || *leader > copies_) return std::nullopt;
    a.leader = static_cast<int>(*leader);
    auto vs = body.substr(a1 + 1, a2 - a1 - 1);
    for (int k = 0; k < copies_; ++k) {
      auto comma = vs.find(',');
      auto v = parse_int(vs.substr(0, comma));
      if (!v || *v < 0 || *v >= m_) return std::nullopt;
      a.v[k] = static_cast<std::uint8_t>(*v);
      if ((comma == std::string_view::npos) != (k == copies_ - 1)) return std::nullopt;
      if (comma != std::string_view::npos) vs = vs.substr(comma + 1);
    }
    auto bits = body.substr(a2 + 1);
    if (bits.size() != static_cast<std::size_t>(copies_)) return std::nullopt;
    for (int k = 0; k < copies_; ++k) {
      if (bits[k] != '0' && bits[k] != '1') return std::nullopt;
      if (bits[k] == '1') a.r |= 1U << k;
    }
    return encode(a);
  }

  std::vector<StateId> initial_states() const override { return inputs_; }
  OutputKind output_kind() const override { return OutputKind::Consensus; }

  Opinion opinion(StateId s) const override {
    return std::popcount(decode(s).r) > m_ ? Opinion::Accept : Opinion::Reject;
  }

  void rules(StateId p, StateId q, bool include_silent, std::vector<Transition>& out) const override {
    const Agent a = decode(p);
    const Agent b = decode(q);
    auto emit = [&](const Agent& a2, const Agent& b2) {
      Transition t{p, q, encode(a2), encode(b2), kNoTransitionId};
      if (include_silent || !t.silent()) out.push_back(t);
    };
    const int i = a.leader, j = b.leader;
    // distrib
    if (i == 0) {
      for (int k = 0; k < copies_; ++k) {
        if (a.v[k] == 0) continue;
        Agent a2 = a;
        a2.leader = k + 1;
        emit(a2, b);
      }
    }
    if (j == 0) {
      for (int k = 0; k < copies_; ++k) {
        if (b.v[k] == 0) continue;
        Agent b2 = b;
        b2.leader = k + 1;
        emit(a, b2);
      }
    }
    // steal
    if (i >= 1 && j >= 1 && i != j) {
      Agent a2 = a, b2 = b;
      a2.v[j - 1] = 0;
      a2.v[i - 1] = static_cast<std::uint8_t>((a.v[i - 1] + b.v[i - 1]) % m_);
      b2.v[i - 1] = 0;
      b2.v[j - 1] = static_cast<std::uint8_t>((b.v[j - 1] + a.v[j - 1]) % m_);
      emit(a2, b2);
    }
    // retire, in both orientations
    if (i >= 1 && i == j) {
      Agent a2 = a, b2 = b;
      a2.v[i - 1] = static_cast<std::uint8_t>((a.v[i - 1] + b.v[i - 1]) % m_);
      b2.v[i - 1] = 0;
      b2.leader = 0;
      emit(a2, b2);
      a2 = a;
      b2 = b;
      b2.v[i - 1] = static_cast<std::uint8_t>((a.v[i - 1] + b.v[i - 1]) % m_);
      a2.v[i - 1] = 0;
      a2.leader = 0;
      emit(a2, b2);
    }
    // result
    auto set_bit = [](std::uint32_t r, int k, bool bit) { return bit ? (r | (1U << k)) : (r & ~(1U << k)); };
    if (i >= 1 && j >= 1 && i != j) {
      const bool bi = a.v[i - 1] >= t_, bj = b.v[j - 1] >= t_;
      Agent a2 = a, b2 = b;
      a2.r = set_bit(set_bit(a.r, i - 1, bi), j - 1, bj);
      b2.r = set_bit(set_bit(b.r, i - 1, bi), j - 1, bj);
      emit(a2, b2);
    } else {
      if (i >= 1) {
        const bool bi = a.v[i - 1] >= t_;
        Agent a2 = a, b2 = b;
        a2.r = set_bit(a.r, i - 1, bi);
        b2.r = set_bit(b.r, i - 1, bi);
        emit(a2, b2);
      }
      if (j >= 1) {
        const bool bj = b.v[j - 1] >= t_;
        Agent a2 = a, b2 = b;
        a2.r = set_bit(a.r, j - 1, bj);
        b2.r = set_bit(b.r, j - 1, bj);
        emit(a2, b2);
      }
    }
  }

 private:
  std::string name_;
  int m_;
  int copies_;
  std::int64_t t_;
  std::uint64_t pow_m_ = 1;
  std::uint64_t pow_2_ = 1;
  std::uint64_t count_ = 0;
  std::vector<StateId> inputs_;
};

// InhomTower x [0, H] x BigModulo, or InhomTower x [0, H] when the modulo
// component is dropped.
class CombinedModel final : public ProtocolModel {
 public:
  // Tower index tower->state_count() (or 0 without a tower) is the inert
  // slot of agents whose coefficient vanishes mod m.
  CombinedModel(std::string name, std::optional<Protocol> tower, std::vector<std::int64_t> tower_end, std::int64_t m,
                std::int64_t t, std::shared_ptr<const BigModuloModel> big)
      : name_(std::move(name)),
        tower_(std::move(tower)),
        inert_(tower_ ? tower_->state_count() : 0),
        end_(std::move(tower_end)),
        m_(m),
        t_(t),
        h_max_(3 * m * m),
        big_(std::move(big)),
        n_m_(big_ ? big_->state_count() : 1) {
    end_.push_back(0);
    count_ = checked_mul(checked_mul(inert_ + 1, static_cast<std::uint64_t>(h_max_ + 1)), n_m_);
  }

  struct Parts {
    StateId tower;
    std::int64_t h;
    StateId big;
  };

  Parts split(StateId s) const {
    auto i = index(s);
    Parts out;
    out.big = state(i % n_m_);
    i /= n_m_;
    out.h = static_cast<std::int64_t>(i % static_cast<std::uint64_t>(h_max_ + 1));
    out.tower = state(i / static_cast<std::uint64_t>(h_max_ + 1));
    return out;
  }

  StateId join(const Parts& x) const {
    return state((index(x.tower) * static_cast<std::uint64_t>(h_max_ + 1) + static_cast<std::uint64_t>(x.h)) * n_m_ +
                 index(x.big));
  }

  std::int64_t end_of(StateId tower_state) const { return end_[index(tower_state)]; }
  bool inert(StateId tower_state) const { return index(tower_state) == inert_; }
  StateId inert_slot() const { return state(inert_); }
  std::int64_t h_max() const { return h_max_; }
  bool has_modulo_component() const { return static_cast<bool>(big_); }

  std::string name() const override { return name_; }
  std::uint64_t state_count() const override { return count_; }

  std::string state_name(StateId s) const override {
    const auto x = split(s);
    std::string out = "<" + (inert(x.tower) ? std::string("-") : tower_->state_name(x.tower)) + "|" + std::to_string(x.h);
    if (big_) out += "|" + big_->state_name(x.big);
    return out + ">";
  }

  std::optional<StateId> find_state(std::string_view name) const override {
    if (name.size() < 2 || name.front() != '<' || name.back() != '>') return std::nullopt;
    auto body = name.substr(1, name.size() - 2);
    auto b1 = body.find('|');
    if (b1 == std::string_view::npos) return std::nullopt;
    auto b2 = body.find('|', b1 + 1);
    if ((b2 == std::string_view::npos) == static_cast<bool>(big_)) return std::nullopt;
    const auto tname = body.substr(0, b1);
    auto tower = tname == "-" ? std::optional<StateId>(inert_slot())
                              : (tower_ ? tower_->find_state(tname) : std::nullopt);
    auto h = parse_int(body.substr(b1 + 1, b2 == std::string_view::npos ? std::string_view::npos : b2 - b1 - 1));
    if (!tower || !h || *h < 0 || *h > h_max_) return std::nullopt;
    Parts x{*tower, *h, state(0)};
    if (big_) {
      auto q = big_->find_state(body.substr(b2 + 1));
      if (!q) return std::nullopt;
      x.big = *q;
    }
    return join(x);
  }

  std::vector<StateId> initial_states() const override { return initial_; }
  void set_initial(std::vector<StateId> initial) { initial_ = std::move(initial); }
  OutputKind output_kind() const override { return OutputKind::Consensus; }

  Opinion opinion(StateId s) const override {
    const auto x = split(s);
    if (x.h < h_max_ || !big_) return (x.h % m_) >= t_ ? Opinion::Accept : Opinion::Reject;
    return big_->opinion(x.big);
  }

  void rules(StateId p, StateId q, bool include_silent, std::vector<Transition>& out) const override {
    const auto a = split(p);
    const auto b = split(q);
    std::vector<Transition> tower_rules;
    if (inert(a.tower) || inert(b.tower)) {
      tower_rules.push_back(Transition{a.tower, b.tower, a.tower, b.tower, kNoTransitionId});
    } else {
      tower_rules = with_idle(tower_->model(), a.tower, b.tower);
    }
    std::vector<Transition> big_rules;
    if (big_) {
      big_rules = with_idle(*big_, a.big, b.big);
    } else {
      big_rules.push_back(Transition{a.big, b.big, a.big, b.big, kNoTransitionId});
    }
    const auto start = out.size();
    for (const auto& tr : tower_rules) {
      const auto h = std::min(h_max_, std::max({a.h, b.h, end_of(tr.p_out), end_of(tr.q_out)}));
      for (const auto& mr : big_rules) {
        Transition t{p, q, join({tr.p_out, h, mr.p_out}), join({tr.q_out, h, mr.q_out}), kNoTransitionId};
        if (!include_silent && t.silent()) continue;
        bool dup = false;
        for (auto i = start; i < out.size() && !dup; ++i) dup = out[i].same_rule(t);
        if (!dup) out.push_back(t);
      }
    }
  }

 private:
  static std::vector<Transition> with_idle(const ProtocolModel& model, StateId p, StateId q) {
    std::vector<Transition> rules;
    model.rules(p, q, true, rules);
    Transition idle{p, q, p, q, kNoTransitionId};
    if (std::none_of(rules.begin(), rules.end(), [&](const Transition& t) { return t.same_rule(idle); })) {
      rules.push_back(idle);
    }
    return rules;
  }

  std::string name_;
  std::optional<Protocol> tower_;
  std::uint64_t inert_;
  std::vector<std::int64_t> end_;
  std::int64_t m_;
  std::int64_t t_;
  std::int64_t h_max_;
  std::shared_ptr<const BigModuloModel> big_;
  std::uint64_t n_m_;
  std::uint64_t count_ = 0;
  std::vector<StateId> initial_;
};

struct ModuloSetup {
  Predicate predicate;
  std::vector<std::int64_t> coeffs;  // reduced into (0, m], per variable
  std::string suffix;                // "(a,b;m,t)"
};

ModuloSetup setup_modulo(const char* what, Terms terms, std::int64_t m, std::int64_t t) {
  if (m < 2) throw std::invalid_argument(std::string(what) + ": modulus must be at least 2");
  if (2 * m > kMaxCopies) throw std::invalid_argument(std::string(what) + ": modulus above 7 is not supported");
  if (t <= 0 || t >= m) throw std::invalid_argument(std::string(what) + ": threshold must lie in (0, m)");
  if (terms.empty()) throw std::invalid_argument(std::string(what) + ": no coefficients");
  ModuloSetup out{Predicate::modulo(terms, m, t), {}, {}};
  out.suffix = "(";
  for (const auto& var : out.predicate.variables()) {
    for (const auto& [name, a] : out.predicate.terms()) {
      if (name != var) continue;
      out.coeffs.push_back(normalize_mod(a, m));
      out.suffix += (out.coeffs.size() > 1 ? "," : "") + std::to_string(a);
    }
  }
  out.suffix += ";" + std::to_string(m) + "," + std::to_string(t) + ")";
  return out;
}

std::vector<EdgeInvariant> big_modulo_invariants(std::shared_ptr<const BigModuloModel> model) {
  std::vector<EdgeInvariant> out;
  for (int k = 0; k < model->copies(); ++k) {
    out.push_back(conserved_mod("copy " + std::to_string(k + 1) + " token sum mod m",
                                [model, k](StateId s) -> std::int64_t { return model->decode(s).v[k]; },
                                model->modulus()));
  }
  return out;
}

BoundProtocol combined(const char* what, Terms terms, std::int64_t m, std::int64_t t, bool with_modulo) {
  auto setup = setup_modulo(what, std::move(terms), m, t);
  const auto h_max = 3 * m * m;

  // A coefficient that vanishes mod m adds nothing to h, so its agents get no
  // tower interval at all rather than one of length m.
  Terms tower_terms;
  std::vector<std::size_t> tower_input(setup.coeffs.size(), SIZE_MAX);
  for (std::size_t i = 0; i < setup.coeffs.size(); ++i) {
    if (setup.coeffs[i] == m) continue;
    tower_input[i] = tower_terms.size();
    tower_terms.emplace_back(setup.predicate.variables()[i], setup.coeffs[i]);
  }
  std::optional<BoundProtocol> tower;
  std::vector<std::int64_t> end;
  if (!tower_terms.empty()) {
    tower = build_inhom_tower(tower_terms, h_max);
    for (std::uint64_t i = 0; i < tower->protocol.state_count(); ++i) {
      const auto name = tower->protocol.state_name(state(i));
      end.push_back(std::stoll(name.substr(name.find(',') + 1)));
    }
  }

  std::shared_ptr<const BigModuloModel> big;
  if (with_modulo) big = std::make_shared<BigModuloModel>("big_modulo" + setup.suffix, m, t, setup.coeffs);
  auto model = std::make_shared<CombinedModel>(std::string(what) + setup.suffix,
                                               tower ? std::optional<Protocol>(tower->protocol) : std::nullopt, end, m,
                                               t, big);

  std::vector<StateId> inputs;
  for (std::size_t i = 0; i < setup.coeffs.size(); ++i) {
    const bool inert = tower_input[i] == SIZE_MAX;
    CombinedModel::Parts x{inert ? model->inert_slot() : tower->inputs[tower_input[i]], inert ? 0 : setup.coeffs[i],
                           big ? big->inputs()[i] : state(0)};
    inputs.push_back(model->join(x));
  }
  model->set_initial(inputs);

  BoundProtocol out{Protocol(model), setup.predicate, inputs, {}};
  const auto* cm = model.get();
  auto keep = model;
  auto tower_part = [keep, cm](const Transition& tr) {
    return Transition{cm->split(tr.p).tower, cm->split(tr.q).tower, cm->split(tr.p_out).tower,
                      cm->split(tr.q_out).tower, kNoTransitionId};
  };
  if (tower) {
    for (const auto& inv : tower->invariants) {
      // interactions with an inert agent leave the tower untouched
      auto lifted = lift(inv, "tower: ", tower_part);
      out.invariants.push_back({lifted.name, [keep, cm, check = lifted.holds](const Transition& tr) {
                                  const auto a = cm->split(tr.p).tower, b = cm->split(tr.q).tower;
                                  if (cm->inert(a) || cm->inert(b)) {
                                    return cm->split(tr.p_out).tower == a && cm->split(tr.q_out).tower == b;
                                  }
                                  return check(tr);
                                }});
    }
  }
  if (big) {
    auto big_part = [keep, cm](const Transition& tr) {
      return Transition{cm->split(tr.p).big, cm->split(tr.q).big, cm->split(tr.p_out).big, cm->split(tr.q_out).big,
                        kNoTransitionId};
    };
    for (const auto& inv : big_modulo_invariants(big)) out.invariants.push_back(lift(inv, "modulo: ", big_part));
  }
  out.invariants.push_back({"h covers the tower end", [keep, cm](const Transition& tr) {
                              for (StateId s : {tr.p_out, tr.q_out}) {
                                const auto x = cm->split(s);
                                if (x.h < cm->end_of(x.tower)) return false;
                              }
                              return true;
                            }});
  return out;
}

}  // namespace

BoundProtocol build_big_modulo(Terms terms, std::int64_t m, std::int64_t t) {
  auto setup = setup_modulo("big_modulo", std::move(terms), m, t);
  auto model = std::make_shared<BigModuloModel>("big_modulo" + setup.suffix, m, t, setup.coeffs);
  BoundProtocol out{Protocol(model), setup.predicate, model->inputs(), big_modulo_invariants(model)};
  return out;
}

BoundProtocol build_modulo_combined(Terms terms, std::int64_t m, std::int64_t t) {
  return combined("modulo_combined", std::move(terms), m, t, true);
}

BoundProtocol build_modulo_combined_small(Terms terms, std::int64_t m, std::int64_t t) {
  return combined("modulo_combined_small", std::move(terms), m, t, false);
}

}  // namespace pp
