#include <catch2/catch.hpp>

#include <set>
#include <vector>

#include "cams/rng.hpp"

using cams::SplitRng;

TEST_CASE("identical seeds give identical sequences", "[rng]") {
  SplitRng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams are independent of parent consumption", "[rng]") {
  SplitRng parent(7);
  SplitRng child_before = parent.derive(3);
  parent.next_u64();
  parent.next_u64();
  SplitRng child_after = parent.derive(3);
  REQUIRE(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("stream address matters", "[rng]") {
  SplitRng root(7);
  REQUIRE(root.derive(1).next_u64() != root.derive(2).next_u64());
  REQUIRE(root.derive(1, 2).next_u64() != root.derive(2, 1).next_u64());
}

TEST_CASE("below stays in range and hits all values", "[rng]") {
  SplitRng rng(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  REQUIRE(seen.size() == 7);
}

TEST_CASE("next_double lies in [0,1)", "[rng]") {
  SplitRng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.next_double();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("uniform_int is uniform under a chi-square test", "[rng]") {
  // 10,000 draws over {2, ..., 19}: 18 bins, df = 17, critical value at
  // significance 0.01 is 33.409.
  SplitRng rng(20260808);
  std::vector<int> counts(18, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_int(2, 19) - 2];
  const double expected = static_cast<double>(draws) / 18.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  REQUIRE(chi2 < 33.409);
}
