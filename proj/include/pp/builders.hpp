#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pp/invariants.hpp"
#include "pp/predicate.hpp"
#include "pp/protocol.hpp"

namespace pp {

/// A protocol together with the predicate it is meant to decide and the
/// binding of each predicate variable to an initial state.
struct BoundProtocol {
  Protocol protocol;
  Predicate predicate;
  /// inputs[i] is the initial state of predicate.variables()[i].
  std::vector<StateId> inputs;
  /// Conservation laws that hold on every move edge.
  std::vector<EdgeInvariant> invariants;

  /// Throws std::invalid_argument on a dimension mismatch or negative entry.
  Configuration initial_configuration(std::span<const std::int64_t> x) const;
  Configuration initial_configuration(std::initializer_list<std::int64_t> x) const {
    return initial_configuration(std::span<const std::int64_t>(x.begin(), x.size()));
  }

  /// Input vector of an initial configuration. When several variables share
  /// an initial state its agents are credited to the first such variable.
  /// Throws std::invalid_argument if the support is not bound to any variable.
  std::vector<std::int64_t> input_vector(const Configuration& c) const;

  bool eval(const Configuration& initial) const { return predicate.eval(input_vector(initial)); }
};

using Terms = std::vector<Predicate::Term>;

/// Names coefficients x (one), x, y (two) or x1..xn.
Terms default_terms(std::span<const std::int64_t> coeffs);
inline Terms default_terms(std::initializer_list<std::int64_t> coeffs) {
  return default_terms(std::span<const std::int64_t>(coeffs.begin(), coeffs.size()));
}

/// Pebble-merging protocol for x >= t.
BoundProtocol build_pebbles(std::int64_t t);
/// Tower protocol for x >= t.
BoundProtocol build_tower(std::int64_t t);

/// Interval tower for sum(a_i x_i) >= t with positive coefficients. Levels
/// run over [0, t); an agent whose interval ends at t is at the top.
/// t <= 0 yields a single always-accepting state.
BoundProtocol build_inhom_tower(Terms terms, std::int64_t t);

/// Weak protocol for sum(a_i x_i) >= 1 with coefficients of both signs.
BoundProtocol build_gen_majority(Terms terms);

/// Weak protocol for sum(a_i x_i) >= t, t >= 1, with at least one negative
/// coefficient.
BoundProtocol build_inhom_tower_cancel(Terms terms, std::int64_t t);

/// Consensus protocol from a weak one. Neutral states q become "+q"/"-q".
BoundProtocol weak_convert(const BoundProtocol& weak);

/// Swaps accepting and rejecting states. Consensus protocols only.
BoundProtocol negate(const BoundProtocol& p);

enum class BoolOp { And, Or };

/// Agents run both protocols side by side; each joint variable is bound to
/// the pair of its initial states. Both protocols must be consensus
/// protocols over the same variable names.
BoundProtocol product(const BoundProtocol& left, const BoundProtocol& right, BoolOp op);

/// How a protocol was assembled by negate or product.
struct Composition {
  enum class Kind { Negation, Product };
  Kind kind = Kind::Negation;
  BoolOp op = BoolOp::And;  // Product only
  Protocol left;            // the inner protocol of a negation
  Protocol right;
  /// Product only: component state of a joint state, side 0 (left) or 1.
  std::function<StateId(StateId, int)> component;
};

/// Structure of protocols built by negate or product; nullopt otherwise.
std::optional<Composition> composition_of(const Protocol& p);

/// Any threshold predicate: InhomTower for positive coefficients,
/// otherwise a converted InhomTowerCancel, negated when t <= 0.
BoundProtocol build_threshold(Terms terms, std::int64_t t);

/// Redundant-copy modulo protocol for sum(a_i x_i) mod m >= t, 0 < t < m.
/// Coefficients are reduced into (0, m].
BoundProtocol build_big_modulo(Terms terms, std::int64_t m, std::int64_t t);

/// BigModulo run in parallel with an InhomTower for sum(a_i x_i) >= 3m^2.
BoundProtocol build_modulo_combined(Terms terms, std::int64_t m, std::int64_t t);

/// ModuloCombined with the BigModulo component projected away. Output and
/// move structure agree with build_modulo_combined on every configuration
/// whose weighted size stays below 3m^2, since the tower top is then
/// unreachable and the dropped component never influences the output.
BoundProtocol build_modulo_combined_small(Terms terms, std::int64_t m, std::int64_t t);

/// Builds from an expression such as "and(tower(3), negate(pebbles(2)))".
/// Throws std::invalid_argument with a positioned message.
BoundProtocol build_from_expression(std::string_view expr);

/// Explicit table with the protocol's non-silent rules. Throws
/// std::length_error if the protocol has more than `limit` states.
Protocol materialize(const Protocol& p, std::uint64_t limit = 4096);

/// Reduces a coefficient into (0, m].
std::int64_t normalize_mod(std::int64_t a, std::int64_t m);

}  // namespace pp
