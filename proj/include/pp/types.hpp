#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace pp {

/// Dense index into a protocol's state table.
enum class StateId : std::uint64_t {};

constexpr std::uint64_t index(StateId s) noexcept { return static_cast<std::uint64_t>(s); }
constexpr StateId state(std::uint64_t i) noexcept { return static_cast<StateId>(i); }

/// Opinion an individual state carries under the output scheme.
enum class Opinion : std::uint8_t { Accept, Neutral, Reject };

/// Configuration-level output: a (weak) consensus or no decision.
enum class Decision : std::uint8_t { Accept, Reject, Undecided };

enum class OutputKind : std::uint8_t { Consensus, Weak };

std::string_view to_string(Opinion o) noexcept;
std::string_view to_string(Decision d) noexcept;
std::string_view to_string(OutputKind k) noexcept;

using TransitionId = std::uint64_t;

/// Id carried by transitions that have no row in a transition table
/// (synthesized identities and rules of implicit protocols).
inline constexpr TransitionId kNoTransitionId = std::numeric_limits<TransitionId>::max();

}  // namespace pp
