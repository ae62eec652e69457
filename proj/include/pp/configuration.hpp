#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pp/types.hpp"

namespace pp {

/// Multiset of agents over the states of a protocol.
///
/// Stored sparsely as (state, count) entries sorted by state id with every
/// count strictly positive, so two configurations are equal iff their
/// entry vectors are equal.
class Configuration {
 public:
  struct Entry {
    StateId state;
    std::uint32_t count;

    friend bool operator==(const Entry&, const Entry&) = default;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  Configuration() = default;
  Configuration(std::initializer_list<std::pair<StateId, std::uint32_t>> init);

  /// Builds from arbitrary (state, count) pairs; duplicates are summed and
  /// zero counts dropped.
  static Configuration from_counts(std::span<const std::pair<StateId, std::uint32_t>> counts);

  std::uint32_t count(StateId q) const noexcept;
  std::uint64_t size() const noexcept { return size_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::vector<StateId> support() const;

  void add(StateId q, std::uint32_t n = 1);
  /// Throws std::out_of_range if fewer than n agents occupy q.
  void remove(StateId q, std::uint32_t n = 1);

  /// Componentwise comparison C <= D.
  bool is_sub_multiset_of(const Configuration& other) const noexcept;

  Configuration operator+(const Configuration& other) const;

  /// Deterministic byte encoding of the canonical form.
  std::string canonical_bytes() const;
  std::size_t hash() const noexcept;

  friend bool operator==(const Configuration& a, const Configuration& b) noexcept {
    return a.entries_ == b.entries_;
  }
  friend std::strong_ordering operator<=>(const Configuration& a, const Configuration& b) noexcept {
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::uint64_t size_ = 0;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const noexcept { return c.hash(); }
};

}  // namespace pp
