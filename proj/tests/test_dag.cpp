#include <set>
#include <stdexcept>

#include "doctest.h"
#include "sva/dag.hpp"
#include "sva/rng.hpp"

using sva::Dag;

TEST_CASE("construction rejects invalid graphs") {
  CHECK_THROWS_AS(Dag(2, {{0, 0}}), std::invalid_argument);           // self loop
  CHECK_THROWS_AS(Dag(2, {{0, 1}, {0, 1}}), std::invalid_argument);   // duplicate
  CHECK_THROWS_AS(Dag(2, {{0, 1}, {1, 0}}), std::invalid_argument);   // two-cycle
  CHECK_THROWS_AS(Dag(3, {{0, 1}, {1, 2}, {2, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Dag(2, {{0, 5}}), std::invalid_argument);           // out of range
}

TEST_CASE("chain is blocked by conditioning on the middle node") {
  const Dag g(3, {{0, 1}, {1, 2}});
  CHECK(sva::d_separated(g, {0}, {2}, {1}));
  CHECK_FALSE(sva::d_separated(g, {0}, {2}, {}));
}

TEST_CASE("collider rules") {
  const Dag g(3, {{0, 2}, {1, 2}});
  CHECK(sva::d_separated(g, {0}, {1}, {}));
  CHECK_FALSE(sva::d_separated(g, {0}, {1}, {2}));
}

TEST_CASE("conditioning on a collider descendant opens the path") {
  // 0 -> 2 <- 1, 2 -> 3
  const Dag g(4, {{0, 2}, {1, 2}, {2, 3}});
  CHECK(sva::d_separated(g, {0}, {1}, {}));
  CHECK_FALSE(sva::d_separated(g, {0}, {1}, {3}));
}

TEST_CASE("query validation") {
  const Dag g(3, {{0, 1}});
  CHECK_THROWS_AS(sva::d_separated(g, {0}, {0}, {}), std::invalid_argument);
  CHECK_THROWS_AS(sva::d_separated(g, {}, {1}, {}), std::invalid_argument);
  CHECK_THROWS_AS(sva::d_separated(g, {0}, {1}, {7}), std::invalid_argument);
}

TEST_CASE("factor-model instance: y independent of each c") {
  // y=0, c={1,2,3}, h={4,5}, x={6,7,8}; all loadings nonzero
  std::vector<std::pair<int, int>> edges;
  for (int h = 4; h <= 5; ++h) {
    edges.push_back({0, h});
    for (int c = 1; c <= 3; ++c) edges.push_back({c, h});
    for (int x = 6; x <= 8; ++x) edges.push_back({h, x});
  }
  for (int x = 6; x <= 8; ++x) edges.push_back({0, x});
  const Dag g(9, edges);
  for (int c = 1; c <= 3; ++c) {
    CHECK(sva::d_separated(g, {0}, {c}, {}));
    CHECK_FALSE(sva::d_separated(g, {0}, {c}, {4}));  // conditioning on h opens
  }
  CHECK(sva::d_separated(g, {1}, {2}, {}));
}

namespace {

Dag random_dag(int nodes, sva::Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  const auto order = rng.permutation(nodes);
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j)
      if (rng.uniform() < 0.4) edges.push_back({order[i], order[j]});
  return Dag(nodes, edges);
}

}  // namespace

TEST_CASE("reachability agrees with the brute-force oracle on random DAGs") {
  sva::Rng rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    const int nodes = 3 + static_cast<int>(rng.below(4));  // 3..6
    const Dag g = random_dag(nodes, rng);
    for (int q = 0; q < 30; ++q) {
      const int a = static_cast<int>(rng.below(nodes));
      int b = static_cast<int>(rng.below(nodes));
      if (b == a) b = (b + 1) % nodes;
      std::set<int> s;
      for (int v = 0; v < nodes; ++v)
        if (v != a && v != b && rng.uniform() < 0.3) s.insert(v);
      CHECK(sva::d_separated(g, {a}, {b}, s) ==
            sva::d_separated_bruteforce(g, {a}, {b}, s));
    }
  }
}

TEST_CASE("descendants") {
  const Dag g(4, {{0, 1}, {1, 2}});
  const auto d = g.descendants(0);
  CHECK(d == std::vector<int>{1, 2});
  CHECK(g.descendants(3).empty());
}
