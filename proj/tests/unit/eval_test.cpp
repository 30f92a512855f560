#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "newsclust/error.hpp"
#include "newsclust/eval.hpp"

using namespace newsclust;
using Ids = std::vector<std::uint32_t>;

TEST(PairConfusion, PerfectSplit) {
  const Ids labels = {0, 0, 1, 1};
  const Ids clusters = {1, 1, 2, 2};
  const PairConfusion expected{2, 4, 0, 0};
  EXPECT_EQ(pair_confusion(labels, clusters), expected);
  EXPECT_EQ(pair_confusion_bruteforce(labels, clusters), expected);
}

TEST(PairConfusion, CrossedSplit) {
  const Ids labels = {0, 0, 1, 1};
  const Ids clusters = {1, 2, 1, 2};
  const PairConfusion expected{0, 2, 2, 2};
  EXPECT_EQ(pair_confusion(labels, clusters), expected);
  EXPECT_EQ(pair_confusion_bruteforce(labels, clusters), expected);
}

TEST(PairConfusion, SinglePairs) {
  EXPECT_EQ(pair_confusion_bruteforce(Ids{3, 3}, Ids{0, 0}), (PairConfusion{1, 0, 0, 0}));
  EXPECT_EQ(pair_confusion_bruteforce(Ids{3, 4}, Ids{0, 1}), (PairConfusion{0, 1, 0, 0}));
  EXPECT_EQ(pair_confusion(Ids{3, 4}, Ids{0, 1}), (PairConfusion{0, 1, 0, 0}));
}

TEST(PairConfusion, Errors) {
  EXPECT_THROW(pair_confusion(Ids{1, 2}, Ids{1}), DomainError);
  EXPECT_THROW(pair_confusion(Ids{1}, Ids{1}), DomainError);
  EXPECT_THROW(pair_confusion_bruteforce(Ids{1, 2, 3}, Ids{1, 2}), DomainError);
  EXPECT_THROW(pair_confusion_bruteforce(Ids{}, Ids{}), DomainError);
}

TEST(Mcc, FixedPoints) {
  EXPECT_EQ(mcc({2, 4, 0, 0}), 1.0);
  EXPECT_NEAR(mcc({0, 2, 2, 2}), -0.5, 1e-12);
  const Ids labels = {0, 0, 1, 1};
  const Ids one = {7, 7, 7, 7};
  const auto c = pair_confusion(labels, one);
  EXPECT_EQ(c, (PairConfusion{2, 0, 4, 0}));
  EXPECT_EQ(mcc(c), 0.0);
  EXPECT_EQ(mcc({0, 0, 0, 0}), 0.0);
}

TEST(Mcc, LargeCountsStayAccurate) {
  // 12 equal clusters of 125 matching the labels
  Ids labels(1500);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint32_t>(i / 125);
  EXPECT_EQ(mcc(pair_confusion(labels, labels)), 1.0);
  // counts whose products exceed 2^64
  const PairConfusion big{3'000'000'000ULL, 5'000'000'000ULL, 1'000'000'000ULL, 2'000'000'000ULL};
  const long double num = 3e9L * 5e9L - 1e9L * 2e9L;
  const long double den = std::sqrt(4e9L * 5e9L * 6e9L * 7e9L);
  EXPECT_NEAR(mcc(big), static_cast<double>(num / den), 1e-12);
}

TEST(PairConfusionProperty, FastPathMatchesBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 150)(rng);
    const std::uint32_t nl = std::uniform_int_distribution<std::uint32_t>(1, 12)(rng);
    const std::uint32_t nc = std::uniform_int_distribution<std::uint32_t>(1, 12)(rng);
    Ids labels(n), clusters(n);
    for (auto& x : labels) x = std::uniform_int_distribution<std::uint32_t>(0, nl - 1)(rng);
    for (auto& x : clusters) x = std::uniform_int_distribution<std::uint32_t>(0, nc - 1)(rng);
    const auto fast = pair_confusion(labels, clusters);
    ASSERT_EQ(fast, pair_confusion_bruteforce(labels, clusters));
    EXPECT_EQ(fast.total(), n * (n - 1) / 2);
    const double m = mcc(fast);
    EXPECT_GE(m, -1.0);
    EXPECT_LE(m, 1.0);

    // relabel both sides with random permutations
    std::vector<std::uint32_t> pl(12), pc(12);
    std::iota(pl.begin(), pl.end(), 100u);
    std::iota(pc.begin(), pc.end(), 50u);
    std::shuffle(pl.begin(), pl.end(), rng);
    std::shuffle(pc.begin(), pc.end(), rng);
    Ids l2(n), c2(n);
    for (std::size_t i = 0; i < n; ++i) {
      l2[i] = pl[labels[i]];
      c2[i] = pc[clusters[i]];
    }
    EXPECT_EQ(pair_confusion(l2, c2), fast);
    EXPECT_EQ(mcc(pair_confusion(l2, c2)), m);

    // a bijective relabelling of the labels is a perfect clustering
    if (std::set<std::uint32_t>(labels.begin(), labels.end()).size() > 1 &&
        std::set<std::uint32_t>(labels.begin(), labels.end()).size() < n)
      EXPECT_EQ(mcc(pair_confusion(labels, l2)), 1.0);
  }
}
