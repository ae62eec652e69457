#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pp/types.hpp"

namespace pp {

using NodeId = std::uint32_t;
using Adjacency = std::vector<std::vector<NodeId>>;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Strongly connected components, accumulated range by range.
struct Components {
  std::vector<NodeId> component_of;           // per node, kNoNode if not yet assigned
  std::vector<std::vector<NodeId>> members;   // per component
  std::vector<bool> bottom;                   // no edge leaves the component
};

/// Assigns components to the nodes [first, last) using only edges inside
/// that range; an edge to any node outside the range makes its component
/// non-bottom. Nodes in the range must not be reachable from nodes before
/// `first` for the bottom flags to be meaningful globally.
void strongly_connected_components(const Adjacency& adj, NodeId first, NodeId last, Components& out);

/// Unanimous label over all bottom components reachable from root.
Decision limit_output(const Adjacency& adj, std::span<const Decision> label, NodeId root);

/// Independent reference for limit_output on small graphs: a node is
/// recurrent iff it is reachable back from everything it reaches; the result
/// is the unanimous label of the recurrent nodes reachable from root.
Decision limit_output_bruteforce(const Adjacency& adj, std::span<const Decision> label, NodeId root);

/// Combines labels: equal labels stay, anything else is Undecided.
inline Decision meet(Decision a, Decision b) { return a == b ? a : Decision::Undecided; }

}  // namespace pp
