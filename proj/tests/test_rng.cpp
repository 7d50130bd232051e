#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "sva/rng.hpp"

TEST_CASE("identical seeds give identical streams") {
  sva::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
  sva::Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("derive is deterministic and stream-sensitive") {
  CHECK(sva::Rng::derive(7, 0) == sva::Rng::derive(7, 0));
  CHECK(sva::Rng::derive(7, 0) != sva::Rng::derive(7, 1));
  CHECK(sva::Rng::derive(7, 0) != sva::Rng::derive(8, 0));
}

TEST_CASE("uniform lies in [0,1) and has the right mean") {
  sva::Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal draws have standard moments") {
  sva::Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is within range and roughly uniform") {
  sva::Rng rng(5);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) ++counts[rng.below(10)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 600);
}

TEST_CASE("permutation is a bijection") {
  sva::Rng rng(9);
  const auto p = rng.permutation(50);
  std::set<int> seen(p.begin(), p.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 49);
}
