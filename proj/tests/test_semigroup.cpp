#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "uchain/semigroup.hpp"

using namespace uchain;

TEST(GeneratorSet, SortedAndDeduplicated) {
  GeneratorSet g{5, 3, 5, 9};
  EXPECT_EQ(g.values(), (std::vector<std::uint64_t>{3, 5, 9}));
  EXPECT_EQ(g.min(), 3u);
  EXPECT_EQ(g.max(), 9u);
}

TEST(GeneratorSet, RejectsBadInput) {
  EXPECT_THROW(GeneratorSet(std::vector<std::uint64_t>{}), error);
  EXPECT_THROW((GeneratorSet{0, 3}), error);
  try {
    GeneratorSet g{3, 20'000};
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::resource_limit);
  }
}

TEST(Gcd, Examples) {
  EXPECT_EQ(gcd_set({6}), 6u);
  EXPECT_EQ(gcd_set({4, 6}), 2u);
  EXPECT_EQ(gcd_set({3, 5}), 1u);
}

TEST(Representable, Examples) {
  EXPECT_TRUE(representable(0, {3, 5}));
  EXPECT_TRUE(representable(0, {7}));
  EXPECT_FALSE(representable(7, {3, 5}));
  EXPECT_TRUE(representable(8, {3, 5}));
  EXPECT_THROW(representable(200'000'000, {3, 5}), error);
}

TEST(Representable, AgreesWithCoefficientEnumeration) {
  const std::vector<std::vector<std::uint64_t>> sets{{3, 5}, {4, 6}, {2, 7}, {6, 10, 15}, {5, 8, 11}};
  for (const auto& s : sets) {
    const GeneratorSet g(s);
    for (std::uint64_t v = 0; v <= 80; ++v) { ASSERT_EQ(representable(v, g), oracle::representable_enum(v, s)) << v; }
  }
}

TEST(Representable, MonotoneUnderAddingGenerators) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::uint64_t> s{2 + rng() % 15, 2 + rng() % 15};
    std::vector<std::uint64_t> bigger = s;
    bigger.push_back(1 + rng() % 20);
    const GeneratorSet g(s), h(bigger);
    for (std::uint64_t v = 0; v <= 60; ++v)
      if (representable(v, g)) { ASSERT_TRUE(representable(v, h)); }
  }
}

TEST(Frobenius, Examples) {
  EXPECT_EQ(frobenius_bound({1}), 0u);
  EXPECT_EQ(frobenius_bound({3, 5}), 8u);
  EXPECT_EQ(frobenius_bound({2, 3}), 2u);
  EXPECT_EQ(frobenius_bound({6, 10, 15}), 30u);
  try {
    frobenius_bound({4, 6});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_coprime);
  }
}

TEST(Frobenius, ClosedFormForCoprimePairs) {
  for (std::uint64_t a = 2; a <= 30; ++a)
    for (std::uint64_t b = a + 1; b <= 30; ++b) {
      if (std::gcd(a, b) != 1) continue;
      ASSERT_EQ(frobenius_bound({a, b}), a * b - a - b + 1) << a << "," << b;
    }
}

TEST(Frobenius, WindowAboveBoundAndGapBelow) {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 60) {
    std::vector<std::uint64_t> s;
    const std::size_t k = 1 + rng() % 3;
    for (std::size_t i = 0; i < k; ++i) s.push_back(1 + rng() % 25);
    const GeneratorSet g(s);
    if (gcd_set(g) != 1) continue;
    const auto n = frobenius_bound(g);
    for (std::uint64_t v = n; v <= n + 1000; ++v) { ASSERT_TRUE(representable(v, g)); }
    if (n > 0) { ASSERT_FALSE(representable(n - 1, g)); }
    ++checked;
  }
}

TEST(LengthBound, Examples) {
  EXPECT_EQ(realizable_length_bound({1}, 1), 1u);
  EXPECT_EQ(realizable_length_bound({3, 5}, 4), 12u);
  EXPECT_EQ(realizable_length_bound({2, 3}, 2), 4u);
  EXPECT_THROW(realizable_length_bound({3, 5}, 0), error);
  EXPECT_THROW(realizable_length_bound({2, 4}, 3), error);
}

namespace {

// cycles of lengths 3 and 5 through vertex 0
oracle::Adjacency two_loops() {
  oracle::Adjacency a(7);
  a[0] = {1, 3};
  a[1] = {2};
  a[2] = {0};
  a[3] = {4};
  a[4] = {5};
  a[5] = {6};
  a[6] = {0};
  return a;
}

}  // namespace

TEST(LengthBound, HoldsFromTheVertexCarryingTheCycles) {
  const auto a = two_loops();
  const auto dist = chain_lengths_from(oracle::graph(a), 0);
  const std::uint64_t ecc = *std::max_element(dist.begin(), dist.end());
  EXPECT_EQ(ecc, 4u);
  const auto bound = realizable_length_bound({3, 5}, ecc);
  EXPECT_EQ(bound, 12u);
  const auto w = oracle::walk_table(a, 0, bound + 40);
  for (std::size_t L = bound; L <= bound + 40; ++L)
    for (std::size_t y = 0; y < 7; ++y) { ASSERT_TRUE(w[L][y]) << "0->" << y << " L=" << L; }
}

TEST(LengthBound, SourcesOffTheCyclesNeedTheirOwnLoops) {
  // 3 -> 5 has lengths 2, 7, 10, 12, 13, 15, ...; 14 is missing although
  // it reaches diameter + bound of the loops through 0
  const auto a = two_loops();
  const auto d = chain_diameter(oracle::graph(a));
  EXPECT_EQ(d, 6u);
  EXPECT_EQ(realizable_length_bound({3, 5}, d), 14u);
  const auto w = oracle::walk_table(a, 3, 14);
  EXPECT_FALSE(w[14][5]);
  EXPECT_TRUE(w[13][5]);
}
