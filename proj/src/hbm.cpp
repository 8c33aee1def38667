// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/hbm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <regex>
#include <set>
#include <stdexcept>

#include "hbmsort/error.hpp"
#include "hbmsort/kv.hpp"
#include "hbmsort/merge_net.hpp"

namespace hbmsort {

namespace {

void check_index(int v, const char* what) {
  if (v < 0 || v >= kHbmChannels) {
    throw std::out_of_range(std::string(what) + " index " + std::to_string(v) + " outside [0, 32)");
  }
}

void check_axi(int axi) {
  if (axi < 0 || axi >= kSortAxis) throw std::out_of_range("AXI index " + std::to_string(axi) + " outside [0, 16)");
}

// Keep in sync with config/bandwidth_profile.conf (a test compares them).
constexpr const char* kBuiltinProfile = R"(# Illustrative HBM efficiency profile (fraction of per-channel peak).
# Keys are "MxM,BURST_BYTES" for a pattern reading m channels and writing
# m neighbouring channels. Values are not measurements.
outstanding_bursts = 32

1x1,64 = 0.55
1x1,128 = 0.75
1x1,256 = 0.92
1x1,512 = 1.0
1x1,1024 = 1.0
1x1,2048 = 1.0
1x1,4096 = 1.0

2x2,64 = 0.45
2x2,128 = 0.60
2x2,256 = 0.78
2x2,512 = 0.90
2x2,1024 = 0.97
2x2,2048 = 1.0
2x2,4096 = 1.0

4x4,64 = 0.30
4x4,128 = 0.42
4x4,256 = 0.55
4x4,512 = 0.68
4x4,1024 = 0.80
4x4,2048 = 0.90
4x4,4096 = 1.0

8x8,64 = 0.22
8x8,128 = 0.32
8x8,256 = 0.42
8x8,512 = 0.55
8x8,1024 = 0.68
8x8,2048 = 0.80
8x8,4096 = 0.90
)";

}  // namespace

std::vector<int> route(int port, int channel, const HbmTopology&) {
  check_index(port, "port");
  check_index(channel, "channel");
  const int g1 = HbmTopology::group_of(port);
  const int g2 = HbmTopology::group_of(channel);
  std::vector<int> links;
  for (int k = std::min(g1, g2); k < std::max(g1, g2); ++k) links.push_back(k);
  return links;
}

int phase1_read_channel(int tree, int pass) {
  check_axi(tree);
  return 2 * tree + (pass % 2);
}

int phase1_write_channel(int tree, int pass) {
  check_axi(tree);
  return 2 * tree + 1 - (pass % 2);
}

int phase1_result_channel(int tree, int passes) {
  check_axi(tree);
  return 2 * tree + (passes % 2);
}

ChannelLayout sorter_layout(int phase1_passes) {
  ChannelLayout layout;
  for (int i = 0; i < kSortAxis; ++i) {
    layout.phase1.push_back({i, {phase1_read_channel(i, 0)}, {phase1_write_channel(i, 0)}});
  }
  const int parity = phase1_passes % 2;
  for (int g = 0; g < 4; ++g) {
    AxiAssignment wide{4 * g, {}, {}};
    for (int j = 0; j < 4; ++j) {
      wide.read_channels.push_back(8 * g + 2 * j + parity);
      wide.write_channels.push_back(8 * g + 2 * j + 1 - parity);
    }
    layout.phase2.push_back(wide);
    for (int j = 1; j < 4; ++j) {
      layout.phase2.push_back({4 * g + j, {8 * g + 2 * j + parity}, {8 * g + 2 * j + 1 - parity}});
    }
  }
  return layout;
}

std::array<int, 16> phase2_visit_order(int phase1_passes) {
  std::array<int, 16> order{};
  const int parity = phase1_passes % 2;
  for (int g = 0; g < 4; ++g) {
    for (int c = 0; c < 4; ++c) order[static_cast<std::size_t>(4 * g + c)] = 8 * g + 2 * c + 1 - parity;
  }
  return order;
}

std::vector<LinkConflict> validate_layout(const ChannelLayout& layout, const HbmTopology& topo) {
  std::vector<LinkConflict> out;
  const std::array<const std::vector<AxiAssignment>*, 2> phases{&layout.phase1, &layout.phase2};
  for (int ph = 0; ph < 2; ++ph) {
    std::array<std::set<int>, kLateralLinks> users;
    for (const AxiAssignment& a : *phases[static_cast<std::size_t>(ph)]) {
      check_axi(a.axi);
      for (const auto* list : {&a.read_channels, &a.write_channels}) {
        for (int ch : *list) {
          for (int link : route(axi_port(a.axi), ch, topo)) users[static_cast<std::size_t>(link)].insert(a.axi);
        }
      }
    }
    for (int link = 0; link < kLateralLinks; ++link) {
      const std::vector<int> axis(users[static_cast<std::size_t>(link)].begin(),
                                  users[static_cast<std::size_t>(link)].end());
      for (std::size_t i = 0; i < axis.size(); ++i) {
        for (std::size_t j = i + 1; j < axis.size(); ++j) out.push_back({ph + 1, link, axis[i], axis[j]});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

bool is_valid_pattern(int m) { return m == 1 || m == 2 || m == 4 || m == 8; }

namespace {

bool is_valid_burst(int bytes) {
  return bytes >= 64 && bytes <= 4096 && is_power_of_two(static_cast<std::uint64_t>(bytes));
}

}  // namespace

BandwidthProfile BandwidthProfile::builtin() { return parse(kBuiltinProfile, "<builtin profile>"); }

BandwidthProfile BandwidthProfile::parse(const std::string& text, const std::string& origin) {
  BandwidthProfile p;
  for (const KvEntry& e : parse_kv(text, origin)) p.apply(e, origin);
  p.validate();
  return p;
}

void BandwidthProfile::apply(const KvEntry& e, const std::string& origin) {
  static const std::regex key_re(R"((\d+)x(\d+),(\d+))");
  if (e.key == "outstanding_bursts") {
    const auto v = kv_int(e, origin);
    if (v < 1) kv_fail(e, origin, "outstanding_bursts must be positive");
    outstanding_bursts = static_cast<int>(v);
    return;
  }
  std::smatch m;
  if (!std::regex_match(e.key, m, key_re)) kv_fail(e, origin, "unknown key '" + e.key + "'");
  const int m1 = std::stoi(m[1]);
  const int m2 = std::stoi(m[2]);
  const int burst = std::stoi(m[3]);
  if (m1 != m2 || !is_valid_pattern(m1)) kv_fail(e, origin, "pattern must be one of 1x1, 2x2, 4x4, 8x8");
  if (!is_valid_burst(burst)) kv_fail(e, origin, "burst must be a power of two in [64, 4096]");
  const double eff = kv_double(e, origin);
  if (!(eff > 0.0 && eff <= 1.0)) kv_fail(e, origin, "efficiency must lie in (0, 1]");
  table_[{m1, burst}] = eff;
}

BandwidthProfile BandwidthProfile::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

void BandwidthProfile::set(int m, int burst_bytes, double efficiency) {
  if (!is_valid_pattern(m) || !is_valid_burst(burst_bytes)) throw ConfigError("invalid profile entry");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ConfigError("efficiency must lie in (0, 1]");
  table_[{m, burst_bytes}] = efficiency;
}

bool BandwidthProfile::has(int m, int burst_bytes) const { return table_.count({m, burst_bytes}) != 0; }

double BandwidthProfile::efficiency(int m, int burst_bytes) const {
  const auto it = table_.find({m, burst_bytes});
  if (it == table_.end()) {
    throw ConfigError("bandwidth profile has no entry for " + std::to_string(m) + "x" + std::to_string(m) + "," +
                      std::to_string(burst_bytes) + "; extend the profile");
  }
  return it->second;
}

std::vector<int> BandwidthProfile::patterns() const {
  std::vector<int> out;
  for (const auto& [k, v] : table_) {
    if (out.empty() || out.back() != k.first) out.push_back(k.first);
  }
  return out;
}

std::vector<int> BandwidthProfile::bursts(int m) const {
  std::vector<int> out;
  for (const auto& [k, v] : table_) {
    if (k.first == m) out.push_back(k.second);
  }
  return out;
}

void BandwidthProfile::validate() const {
  if (outstanding_bursts < 1) throw ConfigError("outstanding_bursts must be positive");
  int prev_m = 0;
  double prev = 0.0;
  for (const auto& [k, eff] : table_) {
    if (k.first != prev_m) {
      prev_m = k.first;
      prev = 0.0;
    }
    if (eff < prev) {
      throw ConfigError("efficiency for " + std::to_string(k.first) + "x" + std::to_string(k.first) +
                        " decreases at burst " + std::to_string(k.second));
    }
    prev = eff;
  }
}

double effective_bandwidth(int m, int burst_bytes, const BandwidthProfile& profile, const HbmTopology& topo) {
  if (!is_valid_pattern(m)) throw std::invalid_argument("pattern must be 1, 2, 4 or 8 channels");
  return m * topo.channel_bandwidth * profile.efficiency(m, burst_bytes);
}

// ---------------------------------------------------------------------------

HbmStorage::HbmStorage(const HbmTopology& topo) : topo_(topo) {}

void HbmStorage::check_channel(int channel) const { check_index(channel, "channel"); }

std::span<Record> HbmStorage::reserve(int channel, std::uint64_t count) {
  check_channel(channel);
  if (count * sizeof(Record) > topo_.channel_capacity) {
    throw CapacityError("channel " + std::to_string(channel) + " capacity of " +
                        std::to_string(topo_.channel_capacity) + " bytes exceeded");
  }
  auto& v = data_[static_cast<std::size_t>(channel)];
  if (v.size() < count) v.resize(count);
  return {v.data(), count};
}

void HbmStorage::write(int channel, std::uint64_t offset, std::span<const Record> data) {
  auto dst = reserve(channel, std::max<std::uint64_t>(offset + data.size(), contents(channel).size()));
  std::copy(data.begin(), data.end(), dst.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::span<const Record> HbmStorage::read(int channel, std::uint64_t offset, std::uint64_t count) const {
  const auto all = contents(channel);
  if (offset + count > all.size()) throw std::out_of_range("read past the data in channel " + std::to_string(channel));
  return all.subspan(offset, count);
}

std::span<const Record> HbmStorage::contents(int channel) const {
  check_channel(channel);
  return data_[static_cast<std::size_t>(channel)];
}

void HbmStorage::clear(int channel) {
  check_channel(channel);
  data_[static_cast<std::size_t>(channel)].clear();
}

std::uint64_t HbmStorage::used_bytes(int channel) const { return contents(channel).size() * sizeof(Record); }

HbmTimeline::HbmTimeline(const HbmTopology& topo) : topo_(topo) { link_owner_.fill(-1); }

BurstTiming HbmTimeline::service_burst(double now, int port, int channel, Direction, std::uint64_t bytes,
                                       double efficiency) {
  if (bytes == 0) throw std::invalid_argument("empty burst");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw std::invalid_argument("efficiency must lie in (0, 1]");
  const auto links = route(port, channel, topo_);
  double start = std::max(now, channel_free_[static_cast<std::size_t>(channel)]);
  for (int link : links) {
    const auto k = static_cast<std::size_t>(link);
    if (link_owner_[k] != port) start = std::max(start, link_free_[k]);
  }
  const double finish = start + static_cast<double>(bytes) / (topo_.channel_bandwidth * efficiency);
  channel_free_[static_cast<std::size_t>(channel)] = finish;
  for (int link : links) {
    const auto k = static_cast<std::size_t>(link);
    if (link_owner_[k] == port) {
      link_free_[k] = std::max(link_free_[k], finish);
    } else {
      link_owner_[k] = port;
      link_free_[k] = finish;
    }
  }
  return {start, finish, finish - now};
}

BurstTiming service_burst(HbmTimeline& timeline, HbmStorage& storage, double now, int port, int channel,
                          std::uint64_t offset, std::span<const Record> data, double efficiency) {
  storage.write(channel, offset, data);
  return timeline.service_burst(now, port, channel, Direction::write, data.size_bytes(), efficiency);
}

std::vector<StreamStats> simulate_traffic(std::span<const StreamSpec> streams, const HbmTopology& topo) {
  HbmTimeline tl(topo);
  std::vector<StreamStats> stats(streams.size());
  std::vector<std::uint64_t> issued(streams.size(), 0);
  std::vector<std::size_t> next_channel(streams.size(), 0);
  using Event = std::pair<double, std::size_t>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    if (streams[s].channels.empty() || streams[s].burst_bytes == 0 || streams[s].outstanding < 1) {
      throw std::invalid_argument("stream needs channels, a burst size and at least one outstanding burst");
    }
    for (int k = 0; k < streams[s].outstanding; ++k) events.emplace(0.0, s);
  }
  while (!events.empty()) {
    const auto [t, s] = events.top();
    events.pop();
    const StreamSpec& spec = streams[s];
    if (issued[s] >= spec.total_bytes) continue;
    const std::uint64_t bytes = std::min(spec.burst_bytes, spec.total_bytes - issued[s]);
    const int ch = spec.channels[next_channel[s]++ % spec.channels.size()];
    const BurstTiming bt = tl.service_burst(t, spec.port, ch, spec.dir, bytes, spec.efficiency);
    issued[s] += bytes;
    stats[s].finish = std::max(stats[s].finish, bt.finish);
    events.emplace(bt.finish, s);
  }
  for (std::size_t s = 0; s < streams.size(); ++s) {
    stats[s].bytes_per_sec = stats[s].finish > 0 ? static_cast<double>(streams[s].total_bytes) / stats[s].finish : 0.0;
  }
  return stats;
}

double pattern_rate(int m, int burst_bytes, const BandwidthProfile& profile, const HbmTopology& topo) {
  if (!is_valid_pattern(m)) throw std::invalid_argument("pattern must be 1, 2, 4 or 8 channels");
  const double eff = profile.efficiency(m, burst_bytes);
  StreamSpec rd;
  rd.port = 0;
  rd.dir = Direction::read;
  rd.burst_bytes = static_cast<std::uint64_t>(burst_bytes);
  rd.efficiency = eff;
  rd.outstanding = profile.outstanding_bursts;
  rd.total_bytes = static_cast<std::uint64_t>(m) * 64 * static_cast<std::uint64_t>(burst_bytes);
  StreamSpec wr = rd;
  wr.dir = Direction::write;
  for (int j = 0; j < m; ++j) {
    rd.channels.push_back(2 * j);
    wr.channels.push_back(2 * j + 1);
  }
  const std::array<StreamSpec, 2> streams{rd, wr};
  const auto stats = simulate_traffic(streams, topo);
  return std::min(stats[0].bytes_per_sec, stats[1].bytes_per_sec);
}

}  // namespace hbmsort
