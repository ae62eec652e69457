#include "pp/invariants.hpp"

#include <utility>

namespace pp {

namespace {

std::pair<std::int64_t, std::int64_t> sums(const StateWeight& w, const Transition& t) {
  return {w(t.p) + w(t.q), w(t.p_out) + w(t.q_out)};
}

}  // namespace

EdgeInvariant conserved(std::string name, StateWeight weight) {
  return {std::move(name), [w = std::move(weight)](const Transition& t) {
            auto [before, after] = sums(w, t);
            return before == after;
          }};
}

EdgeInvariant conserved_mod(std::string name, StateWeight weight, std::int64_t m) {
  return {std::move(name), [w = std::move(weight), m](const Transition& t) {
            auto [before, after] = sums(w, t);
            return ((before - after) % m) == 0;
          }};
}

EdgeInvariant non_increasing(std::string name, StateWeight weight) {
  return {std::move(name), [w = std::move(weight)](const Transition& t) {
            auto [before, after] = sums(w, t);
            return after <= before;
          }};
}

EdgeInvariant non_decreasing(std::string name, StateWeight weight) {
  return {std::move(name), [w = std::move(weight)](const Transition& t) {
            auto [before, after] = sums(w, t);
            return after >= before;
          }};
}

EdgeInvariant strictly_increasing(std::string name, StateWeight weight) {
  return {std::move(name), [w = std::move(weight)](const Transition& t) {
            if (t.silent()) return true;
            auto [before, after] = sums(w, t);
            return after > before;
          }};
}

EdgeInvariant lift(EdgeInvariant inner, std::string prefix, std::function<Transition(const Transition&)> project) {
  return {std::move(prefix) + inner.name, [h = std::move(inner.holds), pr = std::move(project)](const Transition& t) {
            Transition image = pr(t);
            return image.silent() || h(image);
          }};
}

}  // namespace pp
