// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/hbm.hpp"

#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "hbmsort/error.hpp"

using namespace hbmsort;

namespace {

const HbmTopology kTopo;
const double kPeak = kTopo.channel_bandwidth;

}  // namespace

TEST(Route, Examples) {
  EXPECT_TRUE(route(0, 3).empty());
  EXPECT_EQ(route(0, 6), (std::vector<int>{0}));
  EXPECT_EQ(route(4, 15), (std::vector<int>{1, 2}));
}

TEST(Route, MatchesPathEnumeration) {
  for (int port = 0; port < kHbmChannels; ++port) {
    for (int ch = 0; ch < kHbmChannels; ++ch) {
      const auto links = route(port, ch);
      ASSERT_EQ(links, oracle::bfs_links(port / 4, ch / 4)) << port << " -> " << ch;
      ASSERT_EQ(links.size(), static_cast<std::size_t>(std::abs(port / 4 - ch / 4)));
    }
  }
}

TEST(Route, RejectsOutOfRange) {
  EXPECT_THROW(route(-1, 0), std::out_of_range);
  EXPECT_THROW(route(0, 32), std::out_of_range);
}

TEST(Layout, PhaseOneUsesOneAxiPerChannelPair) {
  const auto layout = sorter_layout();
  ASSERT_EQ(layout.phase1.size(), 16u);
  std::set<int> channels;
  for (const auto& a : layout.phase1) {
    EXPECT_EQ(a.read_channels, (std::vector<int>{2 * a.axi}));
    EXPECT_EQ(a.write_channels, (std::vector<int>{2 * a.axi + 1}));
    channels.insert(a.read_channels.begin(), a.read_channels.end());
    channels.insert(a.write_channels.begin(), a.write_channels.end());
    for (int ch : a.read_channels) EXPECT_TRUE(route(axi_port(a.axi), ch).empty());
    for (int ch : a.write_channels) EXPECT_TRUE(route(axi_port(a.axi), ch).empty());
  }
  EXPECT_EQ(channels.size(), 32u);
}

TEST(Layout, PhaseOneRolesAlternate) {
  for (int t = 0; t < 16; ++t) {
    EXPECT_EQ(phase1_read_channel(t, 0), 2 * t);
    EXPECT_EQ(phase1_write_channel(t, 0), 2 * t + 1);
    EXPECT_EQ(phase1_read_channel(t, 1), 2 * t + 1);
    EXPECT_EQ(phase1_write_channel(t, 1), 2 * t);
    EXPECT_EQ(phase1_result_channel(t, 5), phase1_write_channel(t, 4));
    EXPECT_EQ(phase1_result_channel(t, 6), phase1_write_channel(t, 5));
  }
}

TEST(Layout, PhaseTwoWideAxisCoverEightChannels) {
  for (int passes = 1; passes <= 2; ++passes) {
    const auto layout = sorter_layout(passes);
    for (const auto& a : layout.phase2) {
      std::set<int> chans(a.read_channels.begin(), a.read_channels.end());
      chans.insert(a.write_channels.begin(), a.write_channels.end());
      if (a.axi % 4 == 0) {
        const int g = a.axi / 4;
        std::set<int> expect;
        for (int c = 8 * g; c < 8 * g + 8; ++c) expect.insert(c);
        EXPECT_EQ(chans, expect);
      } else {
        EXPECT_EQ(chans, (std::set<int>{2 * a.axi, 2 * a.axi + 1}));
      }
      // Reads hit the channels holding phase-1 results.
      for (int ch : a.read_channels) EXPECT_EQ(ch, phase1_result_channel(ch / 2, passes));
    }
  }
}

TEST(Layout, SorterLayoutIsConflictFree) {
  for (int passes = 1; passes <= 8; ++passes) {
    EXPECT_TRUE(validate_layout(sorter_layout(passes)).empty()) << passes;
  }
}

TEST(Layout, AllReadingOneChannelConflicts) {
  ChannelLayout layout;
  for (int a = 0; a < kSortAxis; ++a) layout.phase1.push_back({a, {31}, {}});
  const auto got = validate_layout(layout);
  EXPECT_EQ(got, oracle::layout_conflicts(layout.phase1, 1));
  std::set<int> links;
  for (const auto& c : got) links.insert(c.link);
  EXPECT_EQ(links, (std::set<int>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(Layout, ConflictsMatchOracleOnRandomLayouts) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 200; ++c) {
    ChannelLayout layout;
    for (int a = 0; a < kSortAxis; ++a) {
      if (rng() % 2) continue;
      layout.phase2.push_back({a, {static_cast<int>(rng() % 32)}, {static_cast<int>(rng() % 32)}});
    }
    ASSERT_EQ(validate_layout(layout), oracle::layout_conflicts(layout.phase2, 2));
  }
}

TEST(Layout, VisitOrderFollowsWriteGroups) {
  const auto order = phase2_visit_order(6);
  const auto layout = sorter_layout(6);
  for (int g = 0; g < 4; ++g) {
    const auto& wide = layout.phase2[static_cast<std::size_t>(4 * g)];
    ASSERT_EQ(wide.axi, 4 * g);
    for (int c = 0; c < 4; ++c) EXPECT_EQ(order[static_cast<std::size_t>(4 * g + c)], wide.write_channels[static_cast<std::size_t>(c)]);
  }
}

TEST(Profile, FileMatchesBuiltin) {
  const auto file = BandwidthProfile::load(std::string(HBMSORT_CONFIG_DIR) + "/bandwidth_profile.conf");
  EXPECT_EQ(file.table(), BandwidthProfile::builtin().table());
  EXPECT_EQ(file.outstanding_bursts, 32);
}

TEST(Profile, ShapeOfTheDefault) {
  const auto p = BandwidthProfile::builtin();
  for (int b : p.bursts(1)) {
    if (b >= 512) EXPECT_DOUBLE_EQ(p.efficiency(1, b), 1.0);
  }
  for (int b : p.bursts(4)) EXPECT_EQ(p.efficiency(4, b) == 1.0, b == 4096) << b;
}

TEST(Profile, RejectsBadEntries) {
  EXPECT_THROW(BandwidthProfile::parse("3x3,1024 = 0.5\n"), ConfigError);
  EXPECT_THROW(BandwidthProfile::parse("1x1,1000 = 0.5\n"), ConfigError);
  EXPECT_THROW(BandwidthProfile::parse("1x1,1024 = 1.5\n"), ConfigError);
  EXPECT_THROW(BandwidthProfile::parse("1x1,512 = 0.9\n1x1,1024 = 0.8\n"), ConfigError);
  EXPECT_THROW(BandwidthProfile::parse("latency = 3\n"), ConfigError);
  try {
    BandwidthProfile::parse("1x1,512 = 1\n\nbogus = 2\n", "p.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("p.conf:3"), std::string::npos) << e.what();
  }
}

TEST(EffectiveBandwidth, Examples) {
  const auto p = BandwidthProfile::builtin();
  EXPECT_DOUBLE_EQ(effective_bandwidth(1, 1024, p), kPeak);
  EXPECT_DOUBLE_EQ(effective_bandwidth(4, 4096, p), 4 * kPeak);
  const auto file = BandwidthProfile::load(std::string(HBMSORT_CONFIG_DIR) + "/bandwidth_profile.conf");
  EXPECT_DOUBLE_EQ(effective_bandwidth(4, 512, p), 4 * kPeak * file.efficiency(4, 512));
  EXPECT_LT(effective_bandwidth(4, 512, p), 4 * kPeak);
  BandwidthProfile sparse;
  sparse.set(1, 1024, 1.0);
  EXPECT_THROW(effective_bandwidth(1, 2048, sparse), ConfigError);
  EXPECT_THROW(effective_bandwidth(3, 1024, p), std::invalid_argument);
}

TEST(Timeline, SingleBurstDelta) {
  HbmTimeline tl;
  const auto t = tl.service_burst(0.0, 0, 0, Direction::read, 1024);
  EXPECT_DOUBLE_EQ(t.delta, 1024 / kPeak);
}

TEST(Timeline, SameChannelSerializes) {
  HbmTimeline tl;
  const auto a = tl.service_burst(0.0, 0, 1, Direction::read, 1024);
  const auto b = tl.service_burst(0.0, 2, 1, Direction::write, 1024);
  EXPECT_DOUBLE_EQ(b.finish, 2 * a.finish);
}

TEST(Timeline, DistinctChannelsRunInParallel) {
  HbmTimeline tl;
  for (int ch = 0; ch < 4; ++ch) {
    EXPECT_DOUBLE_EQ(tl.service_burst(0.0, ch, ch, Direction::read, 1024).finish, 1024 / kPeak);
  }
}

TEST(Timeline, OccupiedLinkBlocksOtherPorts) {
  HbmTimeline tl;
  const double d = 1024 / kPeak;
  EXPECT_DOUBLE_EQ(tl.service_burst(0.0, 0, 4, Direction::read, 1024).finish, d);
  // Port 0 may keep using the link it holds.
  EXPECT_DOUBLE_EQ(tl.service_burst(0.0, 0, 6, Direction::read, 1024).finish, d);
  // Port 1 also crosses link 0, to an idle channel: it waits for the link.
  EXPECT_DOUBLE_EQ(tl.service_burst(0.0, 1, 5, Direction::read, 1024).finish, 2 * d);
  // Efficiency stretches the burst.
  EXPECT_DOUBLE_EQ(tl.service_burst(0.0, 16, 16, Direction::read, 1024, 0.5).finish, 2 * d);
}

TEST(Storage, RoundTripIsBitIdentical) {
  HbmStorage s;
  std::mt19937_64 rng(5);
  std::vector<Record> data(1000);
  for (auto& r : data) r = {static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng())};
  HbmTimeline tl;
  service_burst(tl, s, 0.0, 0, 3, 0, data);
  const auto back = s.read(3, 0, data.size());
  EXPECT_TRUE(std::equal(back.begin(), back.end(), data.begin()));
  EXPECT_EQ(s.used_bytes(3), 8000u);
  s.clear(3);
  EXPECT_EQ(s.used_bytes(3), 0u);
}

TEST(Storage, CapacityIsEnforced) {
  HbmTopology small;
  small.channel_capacity = 64;
  HbmStorage s(small);
  EXPECT_NO_THROW(s.write(0, 0, std::vector<Record>(8)));
  EXPECT_THROW(s.write(0, 8, std::vector<Record>(1)), CapacityError);
  EXPECT_THROW(s.read(0, 4, 5), std::out_of_range);
}

TEST(Traffic, AggregateNeverExceedsPatternPeak) {
  const auto p = BandwidthProfile::builtin();
  for (int m : {1, 2, 4, 8}) {
    for (int b : p.bursts(m)) {
      const double r = pattern_rate(m, b, p);
      EXPECT_LE(r, m * kPeak * (1 + 1e-9));
      EXPECT_NEAR(r, effective_bandwidth(m, b, p), 1e-6 * r);
    }
  }
}

TEST(Traffic, SharedChannelHalvesEachStream) {
  StreamSpec a;
  a.port = 0;
  a.channels = {0};
  a.total_bytes = 1 << 20;
  StreamSpec b = a;
  b.port = 1;
  b.dir = Direction::write;
  const std::array<StreamSpec, 2> streams{a, b};
  const auto stats = simulate_traffic(streams);
  EXPECT_NEAR(stats[0].bytes_per_sec + stats[1].bytes_per_sec, kPeak, 0.01 * kPeak);
}
