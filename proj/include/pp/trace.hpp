#pragma once

#include <cstddef>
#include <vector>

#include "pp/protocol.hpp"

namespace pp {

/// Move (with the oriented transition applied) or snipe (with the state hit).
struct StepLabel {
  enum class Kind { Move, Snipe };
  Kind kind = Kind::Move;
  Transition transition{};
  StateId sniped{};

  static StepLabel move(const Transition& t) { return {Kind::Move, t, {}}; }
  static StepLabel snipe(StateId q) { return {Kind::Snipe, {}, q}; }
};

struct TraceStep {
  StepLabel label;
  Configuration config;  // configuration after the step
};

/// Alternating sequence of configurations and step labels.
struct ExecutionTrace {
  Configuration start;
  std::vector<TraceStep> steps;
  bool terminal = false;

  const Configuration& final_config() const { return steps.empty() ? start : steps.back().config; }
  std::size_t snipe_count() const;
};

/// Replays every step through apply_move/apply_snipe, checking that each
/// recorded configuration matches and that moves are rules of p. Throws
/// std::invalid_argument naming the first bad step; returns the final
/// configuration.
Configuration replay(const Protocol& p, const ExecutionTrace& trace);

}  // namespace pp
