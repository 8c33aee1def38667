// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "hbmsort/error.hpp"

using namespace hbmsort;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hbmsort_test_" + name);
}

std::vector<char> bytes_of(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Dataset, SmallPermutation) {
  const auto recs = generate_dataset({4, Distribution::permutation, 0});
  std::vector<std::uint32_t> keys;
  for (const auto& r : recs) keys.push_back(r.key);
  std::sort(keys.begin(), keys.end());
  EXPECT_EQ(keys, (std::vector<std::uint32_t>{1, 2, 3, 4}));
  const auto path = temp_file("small.bin");
  write_dataset(path, recs);
  EXPECT_EQ(std::filesystem::file_size(path), 32u);
  EXPECT_EQ(read_dataset(path), recs);
}

TEST(Dataset, LittleEndianLayout) {
  const auto path = temp_file("le.bin");
  write_dataset(path, {{0x04030201u, 0x08070605u}});
  const auto b = bytes_of(path);
  ASSERT_EQ(b.size(), 8u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(b[static_cast<std::size_t>(i)], static_cast<char>(i + 1));
}

TEST(Dataset, Deterministic) {
  const auto a = temp_file("det_a.bin");
  const auto b = temp_file("det_b.bin");
  write_dataset(a, generate_dataset({5000, Distribution::permutation, 42}));
  write_dataset(b, generate_dataset({5000, Distribution::permutation, 42}));
  EXPECT_EQ(bytes_of(a), bytes_of(b));
  EXPECT_NE(generate_dataset({5000, Distribution::permutation, 43}),
            generate_dataset({5000, Distribution::permutation, 42}));
}

TEST(Dataset, PermutationHasEveryKeyOnce) {
  auto recs = generate_dataset({100000, Distribution::permutation, 7});
  std::vector<bool> seen(100001, false);
  for (const auto& r : recs) {
    ASSERT_GE(r.key, 1u);
    ASSERT_LE(r.key, 100000u);
    ASSERT_FALSE(seen[r.key]);
    seen[r.key] = true;
  }
  EXPECT_FALSE(std::is_sorted(recs.begin(), recs.end(), key_less));
}

TEST(Dataset, UniformHasDuplicatesInRange) {
  const auto recs = generate_dataset({10000, Distribution::uniform, 1});
  std::vector<std::uint32_t> keys;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    ASSERT_GE(recs[i].key, 1u);
    ASSERT_LE(recs[i].key, 10000u);
    ASSERT_EQ(recs[i].value, i);
    keys.push_back(recs[i].key);
  }
  std::sort(keys.begin(), keys.end());
  EXPECT_NE(std::adjacent_find(keys.begin(), keys.end()), keys.end());
}

TEST(Dataset, UniformBelowIsInRangeAndCoversIt) {
  std::mt19937_64 rng(9);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = uniform_below(rng, 7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_THROW(uniform_below(rng, 0), std::invalid_argument);
}

TEST(Dataset, Errors) {
  const auto odd = temp_file("odd.bin");
  {
    std::ofstream out(odd, std::ios::binary);
    out << "abc";
  }
  try {
    read_dataset(odd);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(odd.string()), std::string::npos);
  }
  EXPECT_THROW(read_dataset(temp_file("missing.bin")), IoError);
  EXPECT_THROW(write_dataset("/nonexistent-dir/x.bin", {}), IoError);
  EXPECT_THROW(parse_distribution("gauss"), std::invalid_argument);
  EXPECT_EQ(parse_distribution(to_string(Distribution::uniform)), Distribution::uniform);
}
