#include "pp/dot.hpp"

#include <sstream>

#include "pp/builders.hpp"

namespace pp {

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void arcs(std::ostringstream& os, const std::string& box, StateId a, StateId b, bool into_box) {
  auto one = [&](StateId s, int mult) {
    const auto place = "p" + std::to_string(index(s));
    os << "  " << (into_box ? place : box) << " -> " << (into_box ? box : place);
    if (mult == 2) os << " [label=\"2\"]";
    os << ";\n";
  };
  if (a == b) {
    one(a, 2);
  } else {
    one(a, 1);
    one(b, 1);
  }
}

}  // namespace

std::string export_dot(const Protocol& p, std::uint64_t limit) {
  const Protocol table = p.table() ? p : materialize(p, limit);
  std::ostringstream os;
  os << "digraph " << quoted(p.name()) << " {\n  rankdir=LR;\n";
  for (std::uint64_t i = 0; i < table.state_count(); ++i) {
    const auto s = state(i);
    os << "  p" << i << " [label=" << quoted(table.state_name(s));
    switch (table.opinion(s)) {
      case Opinion::Accept: os << ", shape=doublecircle"; break;
      case Opinion::Reject: os << ", shape=circle"; break;
      case Opinion::Neutral: os << ", shape=circle, style=dashed"; break;
    }
    if (table.is_initial(s)) os << ", penwidth=2";
    os << "];\n";
  }
  std::size_t k = 0;
  for (const auto& t : *table.table()) {
    if (t.silent()) continue;
    const auto box = "t" + std::to_string(k++);
    os << "  " << box << " [shape=box, label=\"\"];\n";
    arcs(os, box, t.p, t.q, true);
    arcs(os, box, t.p_out, t.q_out, false);
  }
  os << "}\n";
  return os.str();
}

}  // namespace pp
