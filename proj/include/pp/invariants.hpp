#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "pp/protocol.hpp"

namespace pp {

/// Property of a single move edge, checked on the oriented transition.
struct EdgeInvariant {
  std::string name;
  std::function<bool(const Transition&)> holds;
};

using StateWeight = std::function<std::int64_t(StateId)>;

/// Sum of weights over pre(t) equals the sum over post(t).
EdgeInvariant conserved(std::string name, StateWeight weight);
/// Same, modulo m.
EdgeInvariant conserved_mod(std::string name, StateWeight weight, std::int64_t m);
/// Weight sum never increases across a move.
EdgeInvariant non_increasing(std::string name, StateWeight weight);
/// Weight sum never decreases across a move.
EdgeInvariant non_decreasing(std::string name, StateWeight weight);
/// Weight sum strictly increases on every non-silent move.
EdgeInvariant strictly_increasing(std::string name, StateWeight weight);

/// Checks `inner` on the image of each edge under `project`. Edges whose
/// image is silent pass trivially.
EdgeInvariant lift(EdgeInvariant inner, std::string prefix, std::function<Transition(const Transition&)> project);

}  // namespace pp
