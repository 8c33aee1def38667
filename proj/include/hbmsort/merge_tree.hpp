// SPDX-License-Identifier: Apache-2.0
//
// (p, l) merge trees built from MMS units, the 4-subtree wide composition,
// and two ways to run a pass: a functional merge and a block-synchronous
// cycle simulation.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hbmsort/merge_net.hpp"
#include "hbmsort/record.hpp"

namespace hbmsort {

/// Unit rates per level, root first. Unit u of level d feeds from units 2u and
/// 2u+1 of level d+1; the last level reads from 2 leaves per unit.
using TreeLevels = std::vector<std::vector<int>>;

inline constexpr int kDefaultBurstBytes = 1024;

/// Leaf buffer depth in records for double-buffered bursts.
constexpr int leaf_buffer_records(int burst_bytes) { return 2 * burst_bytes / static_cast<int>(sizeof(Record)); }

struct TreeSpec {
  int p = 1;
  int l = 2;
  TreeLevels levels;
  int leaf_buffer_depth = leaf_buffer_records(kDefaultBurstBytes);

  int leaves() const { return 2 * static_cast<int>(levels.back().size()); }
  int unit_count() const;
  /// Comparators summed over every generated unit.
  int comparators() const;

  friend bool operator==(const TreeSpec&, const TreeSpec&) = default;
};

TreeSpec build_tree(int p, int l, int burst_bytes = kDefaultBurstBytes);

/// Four identical (p/4)-rate subtrees joined by two (p/2)-rate units and one
/// p-rate unit. Subtrees are shared, not copied.
struct WideTreeSpec {
  std::array<std::shared_ptr<const TreeSpec>, 4> subtrees;
  TreeLevels extra_levels;  // root first: {p}, {p/2, p/2}
  int p = 0;
  int l = 0;

  int extra_comparators() const;
  int comparators() const;
  /// The equivalent single-tree level structure used by the simulators.
  TreeSpec flatten() const;
};

WideTreeSpec compose_wide_tree(const std::array<std::shared_ptr<const TreeSpec>, 4>& subtrees);

struct LeafFeed {
  std::vector<Record> run;
  /// Optional per-cycle arrival counts; when shorter than needed the leaf
  /// falls back to the simulator's fixed feed rate.
  std::vector<std::uint32_t> arrivals;
};

/// Merges all feeds in one pass. Feeds map to leaves 0..feeds.size()-1.
std::vector<Record> run_pass_functional(const TreeSpec& tree, std::span<const LeafFeed> feeds);
std::vector<Record> run_pass_functional(const WideTreeSpec& tree, std::span<const LeafFeed> feeds);

/// Merges many leaf groups through one tree. Reuses buffers between groups.
class FunctionalMerger {
 public:
  explicit FunctionalMerger(TreeLevels levels);

  int leaves() const { return 2 * static_cast<int>(levels_.back().size()); }
  /// Appends the merge of `leaf_runs` (one span per leaf, any may be empty)
  /// to `out`.
  void merge_group(std::span<const std::span<const Record>> leaf_runs, std::vector<Record>& out);
  /// Writes the merge to `out`, which must hold the total input length.
  void merge_group(std::span<const std::span<const Record>> leaf_runs, std::span<Record> out);

 private:
  TreeLevels levels_;
  std::vector<std::vector<MergeUnit>> units_;
  std::vector<Record> buf_a_;
  std::vector<Record> buf_b_;
  std::vector<std::span<const Record>> cur_;
  std::vector<std::span<const Record>> next_;
};

/// Channel-shared leaf feeding: each leaf draws bursts from one channel.
struct ChannelFeed {
  std::vector<int> leaf_channel;   // channel id per leaf
  double channel_rate = 8.0;       // records per cycle per channel
  int burst_records = 128;
};

struct TreeSimOptions {
  /// Records per cycle a leaf can receive; infinity means "always full".
  double feed_rate_per_leaf = std::numeric_limits<double>::infinity();
  std::optional<ChannelFeed> channel_feed;
  /// Records per cycle accepted at the root; infinity means no write limit.
  double sink_rate = std::numeric_limits<double>::infinity();
  /// Inter-level FIFO capacity in blocks of the consuming unit's rate.
  int fifo_depth_blocks = 8;
  /// Records per leaf buffer; 0 takes the tree's value.
  int leaf_buffer_depth = 0;
  /// Idle cycles after each run boundary; negative means the unit's
  /// pipeline depth.
  int reset_cycles = -1;
  std::uint64_t max_cycles = std::uint64_t{1} << 40;
};

struct CycleResult {
  std::vector<Record> output;
  std::uint64_t cycles = 0;
  std::uint64_t fill_latency = 0;
  double root_active_rate = 0.0;
  std::uint64_t root_stall_cycles = 0;
};

/// Cycle simulation of one pass. The output records equal the functional pass.
CycleResult run_pass_cycles(const TreeSpec& tree, std::span<const LeafFeed> feeds,
                            const TreeSimOptions& opts = {});
CycleResult run_pass_cycles(const WideTreeSpec& tree, std::span<const LeafFeed> feeds,
                            const TreeSimOptions& opts = {});

/// Cycle simulation of several consecutive groups. leaf_runs[leaf][group] is
/// the run that leaf contributes to that group.
CycleResult simulate_groups(const TreeLevels& levels, int leaf_buffer_depth,
                            const std::vector<std::vector<std::span<const Record>>>& leaf_runs,
                            std::span<const std::vector<std::uint32_t>> arrivals,
                            const TreeSimOptions& opts);

/// Sum of MMS pipeline depths along a leaf-to-root path.
std::uint64_t fill_latency(const TreeLevels& levels);

// ---------------------------------------------------------------------------
// Trace timing model: cycle estimate from run lengths alone.

/// A class of leaves that are never active at the same time (for example
/// consecutive sub-runs of one sorted sequence). -1 marks an independent leaf.
struct GroupShape {
  std::uint64_t repeat = 1;
  std::vector<std::uint64_t> leaf_len;  // records per leaf, one entry per leaf
};

struct PassShape {
  std::vector<GroupShape> groups;
  std::vector<int> leaf_class;  // empty means all independent
};

struct PassTimingParams {
  double read_rate = std::numeric_limits<double>::infinity();   // records/cycle
  double write_rate = std::numeric_limits<double>::infinity();  // records/cycle
  int reset_cycles = -1;
};

struct PassEstimate {
  std::uint64_t cycles = 0;        // uniform consumption across active leaves
  std::uint64_t skewed_cycles = 0; // one leaf active at a time
  double active_rate = 0.0;        // root records/cycle bound from leaf activity
};

/// Root rate bound when only the marked leaves supply data.
double active_rate_bound(const TreeLevels& levels, const std::vector<bool>& active_leaf);

PassEstimate estimate_pass(const TreeLevels& levels, const PassShape& shape,
                           const PassTimingParams& params);

}  // namespace hbmsort
