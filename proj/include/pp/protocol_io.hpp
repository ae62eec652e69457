#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pp/builders.hpp"
#include "pp/trace.hpp"
#include "pp/verifier.hpp"

namespace pp {

/// Malformed protocol, configuration or trace document. The message starts
/// with the position (byte offset or JSON pointer) of the problem.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parsed protocol file. The predicate and input binding are optional.
struct ProtocolDocument {
  Protocol protocol;
  std::optional<Predicate> predicate;
  std::vector<StateId> inputs;

  /// Present when the document carries a predicate and a full binding.
  std::optional<BoundProtocol> bound() const;
};

/// Table form of p (materialized, non-silent transitions only).
nlohmann::json protocol_to_json(const Protocol& p, std::uint64_t limit = 1u << 16);
/// Adds "predicate" and "inputs".
nlohmann::json protocol_to_json(const BoundProtocol& bp, std::uint64_t limit = 1u << 16);

ProtocolDocument parse_protocol(std::string_view text);
ProtocolDocument protocol_from_json(const nlohmann::json& doc);
/// Throws FormatError for unreadable files too.
ProtocolDocument parse_protocol_file(const std::string& path);

/// Sorted "count×name" entries.
nlohmann::json configuration_to_json(const Protocol& p, const Configuration& c);
Configuration configuration_from_json(const Protocol& p, const nlohmann::json& j);

/// "3×1, 2×0"; the empty configuration prints as "∅".
std::string format_configuration(const Protocol& p, const Configuration& c);
/// Inverse of format_configuration. "*" is accepted in place of "×" and a
/// bare name counts once.
Configuration parse_configuration(const Protocol& p, std::string_view text);

nlohmann::json trace_to_json(const Protocol& p, const ExecutionTrace& t);
ExecutionTrace trace_from_json(const Protocol& p, const nlohmann::json& j);

/// One JSON line per configuration: {"index", "step", "config"}, starting
/// with the start configuration at index 0 and a null step.
std::string trace_to_jsonl(const Protocol& p, const ExecutionTrace& t);

/// Integer value, or "unbounded".
nlohmann::json tolerance_to_json(const Tolerance& t);
nlohmann::json report_to_json(const BoundProtocol& bp, const ToleranceReport& r);

}  // namespace pp
