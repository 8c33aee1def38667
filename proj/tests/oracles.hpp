// SPDX-License-Identifier: Apache-2.0
//
// Reference implementations the tests compare against. None of them share
// code with the library.
#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <random>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "hbmsort/hbm.hpp"
#include "hbmsort/record.hpp"

namespace oracle {

using hbmsort::Record;

/// Stable two-pointer merge: on equal keys `a` goes first.
inline std::vector<Record> two_pointer_merge(const std::vector<Record>& a, const std::vector<Record>& b) {
  std::vector<Record> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) out.push_back(b[j].key < a[i].key ? b[j++] : a[i++]);
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

/// Heap k-way merge; ties go to the lower run index, then run order.
inline std::vector<Record> heap_kway_merge(const std::vector<std::vector<Record>>& runs) {
  using Item = std::tuple<std::uint32_t, std::size_t, std::size_t>;  // key, run, pos
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].empty()) heap.emplace(runs[r][0].key, r, 0);
  }
  std::vector<Record> out;
  while (!heap.empty()) {
    const auto [key, r, pos] = heap.top();
    heap.pop();
    out.push_back(runs[r][pos]);
    if (pos + 1 < runs[r].size()) heap.emplace(runs[r][pos + 1].key, r, pos + 1);
  }
  return out;
}

/// Sorted run of `n` records with keys in [0, key_range); values are unique
/// tags so reordering of equal keys is visible.
inline std::vector<Record> random_run(std::mt19937_64& rng, std::size_t n, std::uint32_t key_range,
                                      std::uint32_t tag_base = 0) {
  std::uniform_int_distribution<std::uint32_t> key(0, key_range - 1);
  std::vector<Record> run(n);
  for (auto& r : run) r.key = key(rng);
  std::sort(run.begin(), run.end(), [](const Record& x, const Record& y) { return x.key < y.key; });
  for (std::size_t i = 0; i < n; ++i) run[i].value = tag_base + static_cast<std::uint32_t>(i);
  return run;
}

inline std::vector<Record> keys(std::initializer_list<std::uint32_t> ks) {
  std::vector<Record> out;
  std::uint32_t v = 0;
  for (auto k : ks) out.push_back({k, v++});
  return out;
}

inline std::vector<std::uint32_t> keys_of(const std::vector<Record>& rs) {
  std::vector<std::uint32_t> out;
  for (const auto& r : rs) out.push_back(r.key);
  return out;
}

/// Lateral links on the path between two crossbar groups, found by BFS over
/// the group chain (group g connects to g+1 through link g).
inline std::vector<int> bfs_links(int from_group, int to_group, int groups = 8) {
  std::vector<int> prev(static_cast<std::size_t>(groups), -1);
  std::vector<int> via(static_cast<std::size_t>(groups), -1);
  std::queue<int> q;
  q.push(from_group);
  prev[static_cast<std::size_t>(from_group)] = from_group;
  while (!q.empty()) {
    const int g = q.front();
    q.pop();
    for (int d : {-1, 1}) {
      const int h = g + d;
      if (h < 0 || h >= groups || prev[static_cast<std::size_t>(h)] != -1) continue;
      prev[static_cast<std::size_t>(h)] = g;
      via[static_cast<std::size_t>(h)] = std::min(g, h);
      q.push(h);
    }
  }
  std::vector<int> links;
  for (int g = to_group; g != from_group; g = prev[static_cast<std::size_t>(g)]) {
    links.push_back(via[static_cast<std::size_t>(g)]);
  }
  std::sort(links.begin(), links.end());
  return links;
}

/// Link conflicts of one phase's assignments: every pair of AXI ports whose
/// BFS paths to their channels share a lateral link.
inline std::vector<hbmsort::LinkConflict> layout_conflicts(const std::vector<hbmsort::AxiAssignment>& phase,
                                                           int phase_no) {
  std::vector<std::set<int>> users(hbmsort::kLateralLinks);
  for (const auto& a : phase) {
    std::vector<int> chans = a.read_channels;
    chans.insert(chans.end(), a.write_channels.begin(), a.write_channels.end());
    for (int ch : chans) {
      for (int link : bfs_links(hbmsort::axi_port(a.axi) / 4, ch / 4)) users[static_cast<std::size_t>(link)].insert(a.axi);
    }
  }
  std::vector<hbmsort::LinkConflict> out;
  for (int link = 0; link < hbmsort::kLateralLinks; ++link) {
    const std::vector<int> v(users[static_cast<std::size_t>(link)].begin(), users[static_cast<std::size_t>(link)].end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) out.push_back({phase_no, link, v[i], v[j]});
    }
  }
  return out;
}

/// Best (u1, u2) by full enumeration; ties prefer larger u1.
inline std::pair<std::int64_t, std::int64_t> brute_floorplan(std::int64_t cost, std::int64_t a1, std::int64_t a2,
                                                             std::int64_t w, std::int64_t budget,
                                                             std::int64_t bound) {
  std::pair<std::int64_t, std::int64_t> best{0, 0};
  for (std::int64_t u1 = 0; u1 <= bound; ++u1) {
    for (std::int64_t u2 = 0; u2 <= bound; ++u2) {
      if (u1 * cost > a1 || u2 * cost > a2 || (u1 + u2) * w > budget) continue;
      const auto s = u1 + u2;
      const auto bs = best.first + best.second;
      if (s > bs || (s == bs && u1 > best.first)) best = {u1, u2};
    }
  }
  return best;
}

/// Phase-1 pass count by stepping run lengths: runs grow by `l` per pass until
/// they reach `target`; the tuned schedule adds one final pass.
inline int count_passes(std::uint64_t per_channel_target, std::uint64_t l, bool tuned_final) {
  int passes = 0;
  for (std::uint64_t run = 1; run < per_channel_target; run *= l) ++passes;
  return passes + (tuned_final ? 1 : 0);
}

}  // namespace oracle
