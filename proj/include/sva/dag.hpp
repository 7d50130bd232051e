#pragma once

#include <set>
#include <utility>
#include <vector>

namespace sva {

// Directed acyclic graph on nodes {0,...,node_count-1}.
class Dag {
 public:
  Dag(int node_count, const std::vector<std::pair<int, int>>& edges);

  int node_count() const { return node_count_; }
  const std::vector<std::vector<int>>& parents() const { return parents_; }
  const std::vector<std::vector<int>>& children() const { return children_; }
  bool has_edge(int from, int to) const;

  // All descendants of `node` (excluding the node itself).
  std::vector<int> descendants(int node) const;

 private:
  int node_count_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

// True iff S blocks every path between A and B (reachability / Bayes-ball).
bool d_separated(const Dag& g, const std::set<int>& a, const std::set<int>& b,
                 const std::set<int>& s);

// Exponential-time oracle: enumerates every path between A and B and applies
// the blocking rules directly. Intended for tests on small graphs.
bool d_separated_bruteforce(const Dag& g, const std::set<int>& a,
                            const std::set<int>& b, const std::set<int>& s);

}  // namespace sva
