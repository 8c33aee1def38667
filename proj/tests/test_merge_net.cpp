// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/merge_net.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"

using namespace hbmsort;
using oracle::keys;
using oracle::keys_of;

TEST(CompareSwap, OrdersByKey) {
  const auto [lo, hi] = compare_swap({5, 0}, {3, 1});
  EXPECT_EQ(lo, (Record{3, 1}));
  EXPECT_EQ(hi, (Record{5, 0}));
}

TEST(CompareSwap, EqualKeysKeepInputOrder) {
  const auto [lo, hi] = compare_swap({7, 1}, {7, 2});
  EXPECT_EQ(lo.value, 1u);
  EXPECT_EQ(hi.value, 2u);
}

TEST(CompareSwap, ExtremeKeys) {
  const auto [lo, hi] = compare_swap({0, 0}, {kMaxKey, 0});
  EXPECT_EQ(lo.key, 0u);
  EXPECT_EQ(hi.key, kMaxKey);
}

TEST(BitonicMergeBlocks, Interleaved) {
  const auto out = bitonic_merge_blocks(keys({1, 3, 5, 7}), keys({2, 4, 6, 8}));
  EXPECT_EQ(keys_of(out), (std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(BitonicMergeBlocks, DisjointRanges) {
  const auto out = bitonic_merge_blocks(keys({1, 2, 3, 4}), keys({5, 6, 7, 8}));
  EXPECT_EQ(keys_of(out), (std::vector<std::uint32_t>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(BitonicMergeBlocks, RejectsMismatchedRates) {
  EXPECT_THROW(bitonic_merge_blocks(keys({1, 2}), keys({1, 2, 3, 4})), std::invalid_argument);
  EXPECT_THROW(bitonic_merge_blocks(keys({1, 2, 3}), keys({1, 2, 3})), std::invalid_argument);
}

TEST(BitonicMergeBlocks, MatchesTwoPointerMerge) {
  std::mt19937_64 rng(11);
  for (int rate = 1; rate <= 32; rate *= 2) {
    for (int c = 0; c < 2000; ++c) {
      // Small key ranges force many ties.
      const std::uint32_t range = c % 2 == 0 ? 8 : 1u << 20;
      const auto a = oracle::random_run(rng, static_cast<std::size_t>(rate), range, 0);
      const auto b = oracle::random_run(rng, static_cast<std::size_t>(rate), range, 1000);
      ASSERT_EQ(bitonic_merge_blocks(a, b), oracle::two_pointer_merge(a, b)) << "rate " << rate;
    }
  }
}

TEST(MmsStep, EmitsOneBlockPerStep) {
  const auto a = keys({1, 3, 5, 7, 9, 11, 13, 15});
  const auto b = keys({2, 4, 6, 8, 10, 12, 14, 16});
  const auto res = merge_runs(4, a, b);
  EXPECT_EQ(keys_of(res.out), keys_of(oracle::two_pointer_merge(a, b)));
  EXPECT_EQ(res.steps, 4u);
}

TEST(MmsStep, ExplicitHeadsFollowTheSelectionRule) {
  MergeUnit unit(4);
  auto first = mms_step(unit, std::span<const Record>(keys({0, 0, 0, 0})), std::span<const Record>(keys({1, 2, 3, 4})));
  EXPECT_EQ(first.consumed, Consumed::both);
  EXPECT_EQ(keys_of(first.out), (std::vector<std::uint32_t>{0, 0, 0, 0}));
  ASSERT_TRUE(unit.has_retained());

  // A exhausted, B = [5..8], retained = [1..4].
  const auto b = keys({5, 6, 7, 8});
  auto second = mms_step(unit, std::nullopt, std::span<const Record>(b));
  EXPECT_EQ(second.consumed, Consumed::b);
  EXPECT_EQ(keys_of(second.out), (std::vector<std::uint32_t>{1, 2, 3, 4}));

  auto third = mms_step(unit, std::nullopt, std::nullopt);
  EXPECT_EQ(third.consumed, Consumed::flush);
  EXPECT_EQ(keys_of(third.out), (std::vector<std::uint32_t>{5, 6, 7, 8}));
  EXPECT_THROW(mms_step(unit, std::nullopt, std::nullopt), std::logic_error);
}

TEST(MmsStep, TiesPreferA) {
  MergeUnit unit(2);
  const auto a0 = std::vector<Record>{{1, 10}, {1, 11}};
  const auto b0 = std::vector<Record>{{1, 20}, {1, 21}};
  mms_step(unit, std::span<const Record>(a0), std::span<const Record>(b0));
  const auto a1 = std::vector<Record>{{5, 12}, {6, 13}};
  const auto b1 = std::vector<Record>{{5, 22}, {6, 23}};
  EXPECT_EQ(mms_step(unit, std::span<const Record>(a1), std::span<const Record>(b1)).consumed, Consumed::a);
}

TEST(MmsStep, RunLevelEquivalenceAndStepCount) {
  std::mt19937_64 rng(12);
  for (int rate : {2, 4, 8}) {
    for (int c = 0; c < 400; ++c) {
      const std::size_t m = rng() % 12;
      const std::size_t n = rng() % 12;
      const std::uint32_t range = c % 3 == 0 ? 4 : 1u << 16;
      const auto a = oracle::random_run(rng, m * static_cast<std::size_t>(rate), range, 0);
      const auto b = oracle::random_run(rng, n * static_cast<std::size_t>(rate), range, 1u << 20);
      const auto res = merge_runs(rate, a, b);
      ASSERT_EQ(res.out, oracle::two_pointer_merge(a, b));
      ASSERT_EQ(res.steps, m + n) << "rate " << rate << " m " << m << " n " << n;
    }
  }
}

TEST(MmsStep, ShortRunsAreEquivalentToo) {
  std::mt19937_64 rng(13);
  for (int c = 0; c < 500; ++c) {
    const auto a = oracle::random_run(rng, rng() % 37, 50, 0);
    const auto b = oracle::random_run(rng, rng() % 37, 50, 500);
    ASSERT_EQ(merge_runs(8, a, b).out, oracle::two_pointer_merge(a, b));
  }
}

TEST(ComparatorStats, ClosedForms) {
  EXPECT_EQ(merger_stats(1), (ComparatorStats{1, 1}));
  EXPECT_EQ(merger_stats(4), (ComparatorStats{12, 3}));
  EXPECT_EQ(mms_stats(1), (ComparatorStats{1, 1}));
  EXPECT_EQ(mms_stats(16).comparators, 160);
  EXPECT_THROW(merger_stats(3), std::invalid_argument);
  EXPECT_THROW(merger_stats(64), std::invalid_argument);
}

TEST(ComparatorStats, MatchesGeneratedNetwork) {
  for (int rate = 1; rate <= 32; rate *= 2) {
    const auto& cells = bitonic_merger_cells(rate);
    std::set<int> stages;
    for (const auto& c : cells) {
      stages.insert(c.stage);
      ASSERT_LT(c.lo, c.hi);
      ASSERT_LT(c.hi, 2 * rate);
    }
    EXPECT_EQ(static_cast<int>(cells.size()), merger_stats(rate).comparators);
    EXPECT_EQ(static_cast<int>(stages.size()), merger_stats(rate).stages);
    // No slot is touched twice within a stage.
    for (int s : stages) {
      std::set<int> used;
      for (const auto& c : cells) {
        if (c.stage != s) continue;
        ASSERT_TRUE(used.insert(c.lo).second);
        ASSERT_TRUE(used.insert(c.hi).second);
      }
    }
  }
}
