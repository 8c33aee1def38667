// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/config.hpp"

#include <gtest/gtest.h>

#include "hbmsort/error.hpp"
#include "hbmsort/report.hpp"

using namespace hbmsort;

namespace {

const std::string kDir = HBMSORT_CONFIG_DIR;

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "t.conf");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, DefaultFileMatchesBuiltInDefaults) {
  const Config file = load_config(kDir + "/default.conf");
  EXPECT_EQ(config_json(file), config_json(Config{}));
}

TEST(Config, DeskFileOnlyShrinksChannels) {
  const Config desk = load_config(kDir + "/desk.conf");
  EXPECT_EQ(desk.hbm.channel_capacity, 1u << 20);
  Config expect;
  expect.hbm.channel_capacity = 1u << 20;
  EXPECT_EQ(config_json(desk), config_json(expect));
}

TEST(Config, MissingKeysKeepDefaults) {
  const Config c = parse_config("sort.tuning = false\n# comment\n\nsort.burst_phase2 = 1024  # trailing\n");
  EXPECT_FALSE(c.sort.tuning);
  EXPECT_EQ(c.sort.burst_phase2, 1024);
  EXPECT_EQ(c.sort.l_phase1, 16);
}

TEST(Config, UnknownKeyNamesTheLine) {
  EXPECT_NE(error_of("sort.k = 16\nsort.leaves = 4\n").find("t.conf:2: unknown key 'sort.leaves'"), std::string::npos);
}

TEST(Config, MalformedValues) {
  EXPECT_NE(error_of("sort.l_phase1 = sixteen\n").find("t.conf:1"), std::string::npos);
  EXPECT_NE(error_of("sort.tuning = maybe\n"), "");
  EXPECT_NE(error_of("sort.k = 16\nsort.k = 16\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("just text\n"), "");
  EXPECT_NE(error_of("hbm.channel_capacity = 0\n"), "");
}

TEST(Config, SemanticValidation) {
  EXPECT_NE(error_of("sort.k = 8\n"), "");
  EXPECT_NE(error_of("sort.l_phase1 = 12\n"), "");
  EXPECT_NE(error_of("sort.phase2_leaves = 32\n"), "");
  EXPECT_NE(error_of("sort.p_phase1 = 4\n"), "");  // p_phase2 no longer 4x
  EXPECT_EQ(error_of("sort.p_phase1 = 4\nsort.p_phase2 = 16\n"), "");
  EXPECT_NE(error_of("sort.burst_phase1 = 1000\n"), "");
  EXPECT_NE(error_of("sort.batch_bytes = 12\n"), "");
  EXPECT_EQ(error_of("sort.l_phase1 = 8\nsort.phase2_leaves = 32\n"), "");
}

TEST(Config, BandwidthRowsReplaceTheTable) {
  const Config c = parse_config("bandwidth.1x1,1024 = 0.9\nbandwidth.4x4,4096 = 0.95\n");
  EXPECT_EQ(c.bandwidth.table().size(), 2u);
  EXPECT_DOUBLE_EQ(c.bandwidth.efficiency(1, 1024), 0.9);
  EXPECT_THROW(c.bandwidth.efficiency(1, 512), ConfigError);
  EXPECT_NE(error_of("sort.k = 16\nbandwidth.5x5,1024 = 0.9\n").find("t.conf:2"), std::string::npos);
  EXPECT_NE(error_of("bandwidth.outstanding_bursts = 4\n"), "");
}

TEST(Config, OtherSections) {
  const Config c = parse_config(
      "hbm.outstanding_bursts = 16\nresource.lut_per_comparator = 100\nfloorplan.crossing_budget = 0\n"
      "model.reference_phase1_gbps = 20\n");
  EXPECT_EQ(c.bandwidth.outstanding_bursts, 16);
  EXPECT_DOUBLE_EQ(c.resource.lut_per_comparator, 100);
  EXPECT_EQ(c.floorplan.crossing_budget, 0);
  EXPECT_DOUBLE_EQ(c.model.phase1_gbps, 20);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config(kDir + "/nope.conf"), ConfigError); }
