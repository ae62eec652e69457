#pragma once

#include <cstdint>
#include <string>

#include "pp/protocol.hpp"

namespace pp {

/// Graphviz Petri-net view: one place per state (accepting double circle,
/// rejecting circle, neutral dashed circle), one box per non-silent
/// transition, arc labels for multiplicity 2.
std::string export_dot(const Protocol& p, std::uint64_t limit = 4096);

}  // namespace pp
