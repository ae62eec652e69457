#include "pp/graph.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace pp {

void strongly_connected_components(const Adjacency& adj, NodeId first, NodeId last, Components& out) {
  if (last > adj.size() || first > last) throw std::out_of_range("component range outside the graph");
  if (out.component_of.size() < last) out.component_of.resize(last, kNoNode);

  // iterative Tarjan
  const auto span = last - first;
  std::vector<NodeId> order(span, kNoNode), low(span, 0);
  std::vector<bool> on_stack(span, false);
  std::vector<NodeId> stack;
  struct Frame {
    NodeId v;
    std::size_t next;
  };
  std::vector<Frame> call;
  NodeId counter = 0;

  for (NodeId root = first; root < last; ++root) {
    if (order[root - first] != kNoNode) continue;
    call.push_back({root, 0});
    order[root - first] = low[root - first] = counter++;
    stack.push_back(root);
    on_stack[root - first] = true;
    while (!call.empty()) {
      auto& f = call.back();
      const auto& succ = adj[f.v];
      if (f.next < succ.size()) {
        const NodeId w = succ[f.next++];
        if (w < first || w >= last) continue;
        if (order[w - first] == kNoNode) {
          order[w - first] = low[w - first] = counter++;
          stack.push_back(w);
          on_stack[w - first] = true;
          call.push_back({w, 0});
        } else if (on_stack[w - first]) {
          low[f.v - first] = std::min(low[f.v - first], order[w - first]);
        }
        continue;
      }
      const NodeId v = f.v;
      call.pop_back();
      if (!call.empty()) {
        const NodeId parent = call.back().v;
        low[parent - first] = std::min(low[parent - first], low[v - first]);
      }
      if (low[v - first] != order[v - first]) continue;
      const auto id = static_cast<NodeId>(out.members.size());
      std::vector<NodeId> comp;
      NodeId w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w - first] = false;
        out.component_of[w] = id;
        comp.push_back(w);
      } while (w != v);
      bool bottom = true;
      for (NodeId x : comp) {
        for (NodeId y : adj[x]) {
          if (y < first || y >= last || out.component_of[y] != id) {
            bottom = false;
            break;
          }
        }
        if (!bottom) break;
      }
      out.members.push_back(std::move(comp));
      out.bottom.push_back(bottom);
    }
  }
}

namespace {

std::vector<bool> reach_from(const Adjacency& adj, NodeId root) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<NodeId> todo{root};
  seen[root] = true;
  while (!todo.empty()) {
    auto v = todo.back();
    todo.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

Decision limit_output(const Adjacency& adj, std::span<const Decision> label, NodeId root) {
  const auto n = static_cast<NodeId>(adj.size());
  if (root >= n || label.size() != adj.size()) throw std::out_of_range("root or labels do not match the graph");
  Components comps;
  strongly_connected_components(adj, 0, n, comps);
  const auto reach = reach_from(adj, root);
  std::optional<Decision> result;
  for (std::size_t c = 0; c < comps.members.size(); ++c) {
    if (!comps.bottom[c] || !reach[comps.members[c].front()]) continue;
    for (auto v : comps.members[c]) result = result ? meet(*result, label[v]) : label[v];
  }
  return result.value_or(Decision::Undecided);
}

Decision limit_output_bruteforce(const Adjacency& adj, std::span<const Decision> label, NodeId root) {
  const auto n = adj.size();
  if (root >= n || label.size() != n) throw std::out_of_range("root or labels do not match the graph");
  std::vector<std::vector<bool>> reach(n);
  for (NodeId v = 0; v < n; ++v) reach[v] = reach_from(adj, v);
  std::optional<Decision> result;
  for (NodeId v = 0; v < n; ++v) {
    if (!reach[root][v]) continue;
    bool recurrent = true;
    for (NodeId u = 0; u < n && recurrent; ++u) {
      if (reach[v][u] && !reach[u][v]) recurrent = false;
    }
    if (recurrent) result = result ? meet(*result, label[v]) : label[v];
  }
  return result.value_or(Decision::Undecided);
}

}  // namespace pp
