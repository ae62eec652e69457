#include "pp/trace.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pp {

std::size_t ExecutionTrace::snipe_count() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) {
    return s.label.kind == StepLabel::Kind::Snipe;
  }));
}

Configuration replay(const Protocol& p, const ExecutionTrace& trace) {
  Configuration c = trace.start;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    try {
      c = step.label.kind == StepLabel::Kind::Move ? apply_move(p, c, step.label.transition)
                                                   : apply_snipe(c, step.label.sniped);
    } catch (const std::exception& e) {
      throw std::invalid_argument("trace step " + std::to_string(i + 1) + ": " + e.what());
    }
    if (c != step.config) {
      throw std::invalid_argument("trace step " + std::to_string(i + 1) + ": recorded configuration differs");
    }
  }
  if (trace.terminal && !is_terminal(p, c)) {
    throw std::invalid_argument("trace claims a terminal end but moves are still enabled");
  }
  return c;
}

}  // namespace pp
