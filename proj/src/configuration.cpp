#include "pp/configuration.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pp {

std::string_view to_string(Opinion o) noexcept {
  switch (o) {
    case Opinion::Accept: return "accept";
    case Opinion::Neutral: return "neutral";
    case Opinion::Reject: return "reject";
  }
  return "?";
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Accept: return "accept";
    case Decision::Reject: return "reject";
    case Decision::Undecided: return "undecided";
  }
  return "?";
}

std::string_view to_string(OutputKind k) noexcept {
  return k == OutputKind::Consensus ? "consensus" : "weak";
}

Configuration::Configuration(std::initializer_list<std::pair<StateId, std::uint32_t>> init) {
  for (const auto& [q, n] : init) add(q, n);
}

Configuration Configuration::from_counts(std::span<const std::pair<StateId, std::uint32_t>> counts) {
  Configuration c;
  for (const auto& [q, n] : counts) c.add(q, n);
  return c;
}

std::uint32_t Configuration::count(StateId q) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, StateId s) { return e.state < s; });
  return (it != entries_.end() && it->state == q) ? it->count : 0;
}

std::vector<StateId> Configuration::support() const {
  std::vector<StateId> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.state);
  return out;
}

void Configuration::add(StateId q, std::uint32_t n) {
  if (n == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, StateId s) { return e.state < s; });
  if (it != entries_.end() && it->state == q) {
    it->count += n;
  } else {
    entries_.insert(it, Entry{q, n});
  }
  size_ += n;
}

void Configuration::remove(StateId q, std::uint32_t n) {
  if (n == 0) return;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                             [](const Entry& e, StateId s) { return e.state < s; });
  if (it == entries_.end() || it->state != q || it->count < n) {
    throw std::out_of_range("configuration has fewer than " + std::to_string(n) +
                            " agents in state #" + std::to_string(index(q)));
  }
  it->count -= n;
  if (it->count == 0) entries_.erase(it);
  size_ -= n;
}

bool Configuration::is_sub_multiset_of(const Configuration& other) const noexcept {
  for (const auto& e : entries_) {
    if (other.count(e.state) < e.count) return false;
  }
  return true;
}

Configuration Configuration::operator+(const Configuration& other) const {
  Configuration out = *this;
  for (const auto& e : other.entries_) out.add(e.state, e.count);
  return out;
}

namespace {
void put_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}
}  // namespace

std::string Configuration::canonical_bytes() const {
  std::string out;
  put_varint(out, entries_.size());
  for (const auto& e : entries_) {
    put_varint(out, index(e.state));
    put_varint(out, e.count);
  }
  return out;
}

std::size_t Configuration::hash() const noexcept {
  // splitmix-style mixing over the entries
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ entries_.size();
  auto mix = [](std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  };
  for (const auto& e : entries_) {
    h = mix(h ^ index(e.state));
    h = mix(h ^ e.count);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace pp
