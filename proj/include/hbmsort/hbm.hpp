// SPDX-License-Identifier: Apache-2.0
//
// HBM model: 32 channels in 8 crossbar groups joined by 7 lateral links, the
// AXI data layout for both sort phases, burst-size efficiency profiles and a
// small discrete-event channel/link service model with real storage.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hbmsort/record.hpp"

namespace hbmsort {

struct KvEntry;

inline constexpr int kHbmChannels = 32;
inline constexpr int kChannelsPerGroup = 4;
inline constexpr int kHbmGroups = kHbmChannels / kChannelsPerGroup;
inline constexpr int kLateralLinks = kHbmGroups - 1;
/// AXI interfaces used by the sorter (one per channel pair).
inline constexpr int kSortAxis = kHbmChannels / 2;

struct HbmTopology {
  double channel_bandwidth = 420e9 / 32;                 // bytes/s, peak per channel
  std::uint64_t channel_capacity = std::uint64_t{256} << 20;  // bytes per channel

  static int group_of(int index) { return index / kChannelsPerGroup; }
};

/// Physical user-side port behind logical sorter AXI `axi`.
constexpr int axi_port(int axi) { return 2 * axi; }

/// Lateral links crossed from physical port `port` to `channel`, in order.
std::vector<int> route(int port, int channel, const HbmTopology& topo = {});

enum class Direction { read, write };

struct AxiAssignment {
  int axi = 0;  // logical AXI index
  std::vector<int> read_channels;
  std::vector<int> write_channels;
};

struct ChannelLayout {
  std::vector<AxiAssignment> phase1;
  std::vector<AxiAssignment> phase2;
};

/// The sorter's layout. Phase 1: AXI-i reads 2i and writes 2i+1 on even passes
/// (swapped on odd ones). Phase 2: AXI-4g reads the 4 channels of group pair g
/// holding phase-1 data and writes the other 4; AXI-(4g+j) keep their local
/// pair. `phase1_passes` fixes which parity holds the phase-1 result.
ChannelLayout sorter_layout(int phase1_passes = 1);

int phase1_read_channel(int tree, int pass);
int phase1_write_channel(int tree, int pass);
/// Channel holding tree t's data after `passes` phase-1 passes.
int phase1_result_channel(int tree, int passes);

/// Phase-2 batch destinations: entry v = 4g + c is channel c (0..3) of write
/// group g, i.e. the c-th channel written by AXI-4g.
std::array<int, 16> phase2_visit_order(int phase1_passes);

struct LinkConflict {
  int phase = 1;
  int link = 0;
  int axi_a = 0;
  int axi_b = 0;

  friend bool operator==(const LinkConflict&, const LinkConflict&) = default;
};

/// Pairs of AXIs that cross the same lateral link within one phase, ordered by
/// (phase, link, axi_a, axi_b).
std::vector<LinkConflict> validate_layout(const ChannelLayout& layout, const HbmTopology& topo = {});

// ---------------------------------------------------------------------------
// Bandwidth profile

/// Efficiency (fraction of peak) per (m×m pattern, burst bytes).
class BandwidthProfile {
 public:
  int outstanding_bursts = 32;

  /// The illustrative profile shipped with the project.
  static BandwidthProfile builtin();
  /// `MxM,BYTES = fraction` lines plus `outstanding_bursts = n`.
  static BandwidthProfile parse(const std::string& text, const std::string& origin = "<string>");
  static BandwidthProfile load(const std::filesystem::path& path);

  /// Applies one `MxM,BYTES = fraction` or `outstanding_bursts = n` entry.
  void apply(const KvEntry& entry, const std::string& origin);
  void clear() { table_.clear(); }
  void set(int m, int burst_bytes, double efficiency);
  bool has(int m, int burst_bytes) const;
  /// Throws ConfigError for pairs the profile does not cover.
  double efficiency(int m, int burst_bytes) const;
  std::vector<int> patterns() const;
  std::vector<int> bursts(int m) const;
  /// Range and monotonicity checks; throws ConfigError.
  void validate() const;

  const std::map<std::pair<int, int>, double>& table() const { return table_; }

 private:
  std::map<std::pair<int, int>, double> table_;
};

bool is_valid_pattern(int m);

/// Aggregate per-direction bandwidth of one m×m pattern in bytes/s.
double effective_bandwidth(int m, int burst_bytes, const BandwidthProfile& profile,
                           const HbmTopology& topo = {});

// ---------------------------------------------------------------------------
// Storage and burst service

/// Per-channel record storage with capacity enforcement.
class HbmStorage {
 public:
  explicit HbmStorage(const HbmTopology& topo = {});

  void write(int channel, std::uint64_t offset, std::span<const Record> data);
  std::span<const Record> read(int channel, std::uint64_t offset, std::uint64_t count) const;
  /// Whole contents of a channel (records written so far).
  std::span<const Record> contents(int channel) const;
  std::span<Record> reserve(int channel, std::uint64_t count);
  void clear(int channel);
  std::uint64_t used_bytes(int channel) const;

 private:
  void check_channel(int channel) const;
  HbmTopology topo_;
  std::array<std::vector<Record>, kHbmChannels> data_;
};

struct BurstTiming {
  double start = 0.0;
  double finish = 0.0;
  double delta = 0.0;  // finish - request time
};

/// Channel and lateral-link occupancy. Bursts on one channel serialize (reads
/// and writes share it); a link is held by one port at a time. Callers issue
/// requests in (time, port) order.
class HbmTimeline {
 public:
  explicit HbmTimeline(const HbmTopology& topo = {});

  BurstTiming service_burst(double now, int port, int channel, Direction dir, std::uint64_t bytes,
                            double efficiency = 1.0);
  double channel_free_at(int channel) const { return channel_free_[static_cast<std::size_t>(channel)]; }

 private:
  HbmTopology topo_;
  std::array<double, kHbmChannels> channel_free_{};
  std::array<double, kLateralLinks> link_free_{};
  std::array<int, kLateralLinks> link_owner_{};
};

/// Writes a burst into storage and books its time on the timeline.
BurstTiming service_burst(HbmTimeline& timeline, HbmStorage& storage, double now, int port, int channel,
                          std::uint64_t offset, std::span<const Record> data, double efficiency = 1.0);

/// One stream of same-direction bursts rotating over `channels`.
struct StreamSpec {
  int port = 0;
  std::vector<int> channels;
  Direction dir = Direction::read;
  std::uint64_t burst_bytes = 1024;
  std::uint64_t total_bytes = 0;
  double efficiency = 1.0;
  int outstanding = 32;
};

struct StreamStats {
  double finish = 0.0;         // seconds
  double bytes_per_sec = 0.0;
};

/// Event-driven replay of concurrent streams, ordered by (time, stream index).
std::vector<StreamStats> simulate_traffic(std::span<const StreamSpec> streams, const HbmTopology& topo = {});

/// Sustained per-direction rate of one m×m pattern replayed on the timeline.
double pattern_rate(int m, int burst_bytes, const BandwidthProfile& profile, const HbmTopology& topo = {});

}  // namespace hbmsort
