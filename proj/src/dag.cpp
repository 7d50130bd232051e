#include "sva/dag.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>

namespace sva {

Dag::Dag(int node_count, const std::vector<std::pair<int, int>>& edges)
    : node_count_(node_count),
      parents_(node_count),
      children_(node_count) {
  if (node_count <= 0) throw std::invalid_argument("Dag: node_count must be positive");
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= node_count || j < 0 || j >= node_count)
      throw std::invalid_argument("Dag: edge endpoint out of range");
    if (i == j) throw std::invalid_argument("Dag: self-loop");
    if (has_edge(i, j)) throw std::invalid_argument("Dag: duplicate edge");
    if (has_edge(j, i)) throw std::invalid_argument("Dag: two-cycle");
    children_[i].push_back(j);
    parents_[j].push_back(i);
  }
  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<int> indeg(node_count, 0);
  for (int v = 0; v < node_count; ++v) indeg[v] = static_cast<int>(parents_[v].size());
  std::vector<int> stack;
  for (int v = 0; v < node_count; ++v)
    if (indeg[v] == 0) stack.push_back(v);
  int seen = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++seen;
    for (int w : children_[v])
      if (--indeg[w] == 0) stack.push_back(w);
  }
  if (seen != node_count) throw std::invalid_argument("Dag: graph has a cycle");
}

bool Dag::has_edge(int from, int to) const {
  const auto& ch = children_[from];
  return std::find(ch.begin(), ch.end(), to) != ch.end();
}

std::vector<int> Dag::descendants(int node) const {
  std::vector<bool> vis(node_count_, false);
  std::vector<int> stack{node};
  std::vector<int> out;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : children_[v]) {
      if (!vis[w]) {
        vis[w] = true;
        out.push_back(w);
        stack.push_back(w);
      }
    }
  }
  return out;
}

namespace {

void check_query(const Dag& g, const std::set<int>& a, const std::set<int>& b,
                 const std::set<int>& s) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("d_separated: A and B must be nonempty");
  auto check_range = [&](const std::set<int>& set) {
    for (int v : set)
      if (v < 0 || v >= g.node_count())
        throw std::invalid_argument("d_separated: node out of range");
  };
  check_range(a);
  check_range(b);
  check_range(s);
  auto disjoint = [](const std::set<int>& x, const std::set<int>& y) {
    for (int v : x)
      if (y.count(v)) return false;
    return true;
  };
  if (!disjoint(a, b) || !disjoint(a, s) || !disjoint(b, s))
    throw std::invalid_argument("d_separated: A, B, S must be pairwise disjoint");
}

}  // namespace

bool d_separated(const Dag& g, const std::set<int>& a, const std::set<int>& b,
                 const std::set<int>& s) {
  check_query(g, a, b, s);
  const int n = g.node_count();
  // Bayes-ball: visit states (node, arrived-from-child?)
  std::vector<bool> visited_up(n, false), visited_down(n, false);
  std::vector<std::pair<int, bool>> stack;  // (node, from_child)
  for (int v : a) stack.emplace_back(v, true);
  while (!stack.empty()) {
    auto [v, from_child] = stack.back();
    stack.pop_back();
    auto& mark = from_child ? visited_up : visited_down;
    if (mark[v]) continue;
    mark[v] = true;
    const bool observed = s.count(v) != 0;
    if (!observed && b.count(v)) return false;
    if (from_child) {
      if (!observed) {
        for (int p : g.parents()[v]) stack.emplace_back(p, true);
        for (int c : g.children()[v]) stack.emplace_back(c, false);
      }
    } else {
      if (observed) {
        // collider (or bounce toward one): send ball back up
        for (int p : g.parents()[v]) stack.emplace_back(p, true);
      } else {
        for (int c : g.children()[v]) stack.emplace_back(c, false);
      }
    }
  }
  return true;
}

bool d_separated_bruteforce(const Dag& g, const std::set<int>& a,
                            const std::set<int>& b, const std::set<int>& s) {
  check_query(g, a, b, s);

  // Precompute descendant sets for the collider rule.
  const int n = g.node_count();
  std::vector<std::set<int>> desc(n);
  for (int v = 0; v < n; ++v) {
    auto d = g.descendants(v);
    desc[v] = std::set<int>(d.begin(), d.end());
  }

  auto blocked = [&](const std::vector<int>& path) {
    for (size_t k = 1; k + 1 < path.size(); ++k) {
      const int prev = path[k - 1], mid = path[k], next = path[k + 1];
      const bool collider = g.has_edge(prev, mid) && g.has_edge(next, mid);
      if (collider) {
        bool active = s.count(mid) != 0;
        if (!active)
          for (int d : desc[mid])
            if (s.count(d)) { active = true; break; }
        if (!active) return true;
      } else if (s.count(mid)) {
        return true;
      }
    }
    return false;
  };

  // DFS over all simple paths from each node of A to any node of B.
  std::vector<int> path;
  std::vector<bool> on_path(n, false);
  bool connected = false;
  std::function<void(int)> dfs = [&](int v) {
    if (connected) return;
    path.push_back(v);
    on_path[v] = true;
    if (b.count(v) && path.size() >= 2) {
      if (!blocked(path)) connected = true;
    } else {
      auto step = [&](int w) {
        if (!on_path[w] && !a.count(w)) dfs(w);
      };
      for (int w : g.children()[v]) step(w);
      for (int w : g.parents()[v]) step(w);
    }
    on_path[v] = false;
    path.pop_back();
  };
  for (int start : a) {
    dfs(start);
    if (connected) return false;
  }
  return true;
}

}  // namespace sva
