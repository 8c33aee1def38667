// SPDX-License-Identifier: Apache-2.0
//
// Two-phase sort: 16 per-channel trees run multi-pass in phase 1, then one
// wide tree built from four reused trees merges all channels in a single pass
// and writes batches round-robin over 16 channels.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbmsort/config.hpp"
#include "hbmsort/hbm.hpp"
#include "hbmsort/merge_tree.hpp"
#include "hbmsort/record.hpp"

namespace hbmsort {

/// One phase-1 pass. Each channel is cut into blocks of `block` records and
/// every block is processed independently: its runs of `in_run` are merged in
/// groups into runs of `out_run` (the last run of a block may be shorter).
struct PassPlan {
  std::uint64_t block = 0;
  std::uint64_t in_run = 0;
  std::uint64_t out_run = 0;
};

struct SortPlan {
  std::uint64_t n = 0;            // records requested
  std::uint64_t padded_n = 0;     // after padding to the granule
  std::uint64_t per_channel = 0;  // records per phase-1 channel
  std::uint64_t subrun = 0;       // phase-2 leaf feed length
  int subruns_per_channel = 4;
  bool tuned = true;
  int phase1_passes = 0;
  std::vector<PassPlan> passes;

  /// Run length after each pass (the out_run column).
  std::vector<std::uint64_t> run_lengths() const;
};

/// Throws CapacityError when the padded input does not fit 16 channels.
SortPlan plan_sort(std::uint64_t n, const SortConfig& cfg, const HbmTopology& topo = {});

/// Places the padded input on the phase-1 read channels (tree t gets records
/// [t*per_channel, (t+1)*per_channel) on channel 2t).
void load_input(const SortPlan& plan, std::span<const Record> input, HbmStorage& storage);

struct Phase1Stats {
  int passes = 0;
  /// Per pass, the slowest tree's simulated cycles (empty unless simulated).
  std::vector<std::uint64_t> simulated_pass_cycles;
};

struct EngineOptions {
  int threads = 1;
  bool simulate = false;  // run the cycle simulator alongside the functional merge
};

Phase1Stats run_phase1(const Config& cfg, const SortPlan& plan, HbmStorage& storage, const EngineOptions& opts = {});

/// Tree t's sub-runs after phase 1, in order.
std::vector<std::span<const Record>> phase1_subruns(const SortPlan& plan, const HbmStorage& storage, int tree);

struct BatchedOutput {
  std::size_t batch_records = 512;
  std::vector<int> channels;                 // physical channel per visit slot
  std::vector<std::vector<Record>> streams;  // data written per visit slot
  std::uint64_t total_records = 0;
};

struct Phase2Stats {
  std::uint64_t simulated_cycles = 0;
};

/// Phase-2 leaf for sub-run s of tree t.
constexpr int phase2_leaf(int tree, int subrun, int subruns_per_channel) { return tree * subruns_per_channel + subrun; }

/// Merges the 64 phase-1 sub-runs with the wide tree and distributes batches.
BatchedOutput run_phase2(const Config& cfg, const SortPlan& plan, HbmStorage& storage, const EngineOptions& opts = {},
                         Phase2Stats* stats = nullptr);

/// Cuts a record stream into batches dealt round-robin over `slots` streams.
BatchedOutput make_batches(std::span<const Record> stream, std::size_t batch_records, std::vector<int> channels);

/// Reads batches back in visit order. A missing batch, a short batch that is
/// not the last one, or leftover data raise IntegrityError with the batch index.
std::vector<Record> reconstruct_output(const BatchedOutput& out);

struct VerifyResult {
  bool ok = true;
  std::uint64_t first_bad = 0;
  std::string message;
};

/// Passes iff keys are exactly 1..n in order.
VerifyResult verify_permutation(std::span<const Record> output, std::uint64_t n);
/// Passes iff `output` is the stable sort of `input` by key.
VerifyResult verify_stable_sort(std::span<const Record> input, std::span<const Record> output);

// ---------------------------------------------------------------------------
// Timing

struct PhaseTiming {
  std::uint64_t cycles = 0;          // uniform-consumption estimate
  std::uint64_t skewed_cycles = 0;   // one leaf active at a time
  std::vector<std::uint64_t> pass_cycles;
  double seconds = 0.0;
  double gbps = 0.0;                 // input bytes / seconds / 1e9
  double read_rate = 0.0;            // records/cycle bound from memory
  double write_rate = 0.0;
  double active_rate = 0.0;          // root rate bound from leaf activity (last pass)
};

struct TimingModel {
  PhaseTiming phase1;
  PhaseTiming phase2;
  double overall_gbps = 0.0;
  double bandwidth_utilization_gbps = 0.0;
};

/// Cycle estimate from the plan's run lengths alone; needs no record data.
TimingModel model_timing(const SortPlan& plan, const Config& cfg);

/// Trace shape of one phase-1 pass for a single tree.
PassShape phase1_pass_shape(const SortPlan& plan, int pass, int leaves);
/// Trace shape of phase 2 for the wide tree.
PassShape phase2_shape(const SortPlan& plan, int leaves);

// ---------------------------------------------------------------------------
// Whole pipeline

struct SortResult {
  SortPlan plan;
  std::vector<Record> output;
  Phase1Stats phase1;
  Phase2Stats phase2;
};

/// Sorts `input` end to end through storage, both phases and reconstruction.
SortResult sort_records(std::span<const Record> input, const Config& cfg, const EngineOptions& opts = {});

}  // namespace hbmsort
