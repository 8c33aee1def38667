// SPDX-License-Identifier: Apache-2.0
//
// Closed-form performance, comparator/LUT resource and floorplan models.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbmsort/hbm.hpp"
#include "hbmsort/merge_tree.hpp"

namespace hbmsort {

/// Smallest j with base^j >= n (0 for n <= 1). Integer arithmetic only.
int ceil_log(std::uint64_t n, std::uint64_t base);

/// Single-tree sort: beta_memory / ceil(log_l N). Bandwidths in bytes/s.
double perf_single_tree(std::uint64_t n, int l, double beta_memory);
/// k parallel trees over N/k records each: k * beta_channel / ceil(log_l(N/k)).
double perf_phase1(std::uint64_t n, int k, int l, double beta_channel);
/// Same with an explicit pass count (e.g. the tuned schedule's).
double perf_phase1_with_passes(int passes, int k, double beta_channel);
/// Harmonic composition of two sequential phases.
double perf_overall(double beta_phase1, double beta_phase2);
/// HBM traffic implied by phase-1 throughput: one read and one write stream per pass.
double bandwidth_utilization(double beta_phase1, int passes);

struct ResourceParams {
  std::uint64_t base_comparators = 0;   // L(1)
  double lut_per_comparator = 116.0;
  double lut_buffer_fraction = 0.75;    // leaf buffers built from LUT shift registers
  int axi_converter_luts = 5000;
  int axi_converter_ffs = 6000;
};

/// L(p) = 2 L(p/2) + MMS(p) comparators, L(1) = base.
std::uint64_t recurrence_comparators(int p, std::uint64_t base = 0);

/// LUTs of one LUT-based leaf buffer holding two bursts of 512-bit words.
int leaf_buffer_luts(int burst_bytes);
int lut_buffer_count(int leaves, const ResourceParams& params);

struct ResourceEstimate {
  int p = 0;
  std::uint64_t comparators = 0;
  int lut_buffers = 0;
  int buffer_luts = 0;   // all LUT-based leaf buffers together
  double luts = 0.0;
  int ffs_axi = 0;
};

/// Recurrence-based estimate for a (p, l = p) tree with one AXI converter.
ResourceEstimate resource_tree(int p, const ResourceParams& params);
/// Per-tree estimate for a built tree with the given leaf burst size.
ResourceEstimate tree_resources(const TreeSpec& tree, int burst_bytes, const ResourceParams& params);
/// LUT-per-comparator value that makes tree_resources hit `measured_luts`.
double calibrate_lut_per_comparator(const TreeSpec& tree, int burst_bytes, double measured_luts,
                                    const ResourceParams& params);

struct FloorplanProblem {
  std::int64_t tree_cost = 0;      // L
  std::int64_t die1_capacity = 0;  // a1
  std::int64_t die2_capacity = 0;  // a2
  std::int64_t axi_width = 0;      // w
  std::int64_t crossing_budget = 0;  // W
};

struct FloorplanSolution {
  std::int64_t u1 = 0;
  std::int64_t u2 = 0;
  std::int64_t objective = 0;

  friend bool operator==(const FloorplanSolution&, const FloorplanSolution&) = default;
};

/// Maximizes u1 + u2 subject to (u1+u2) w <= W, u1 L <= a1, u2 L <= a2; ties
/// go to the larger u1.
FloorplanSolution floorplan_solve(const FloorplanProblem& prob);

struct BurstChoice {
  int burst_bytes = 0;
  double efficiency = 0.0;
  int buffer_luts = 0;     // per LUT-based leaf buffer
  bool below_peak = false; // best efficiency in the row is under 0.95
};

struct BurstSelection {
  BurstChoice phase1;  // pattern 1x1, trees used only in phase 1
  BurstChoice phase2;  // pattern 4x4, trees reused in phase 2
  std::int64_t total_buffer_luts = 0;
  bool over_budget = false;
  std::vector<std::string> warnings;
};

struct BurstSelectionParams {
  int leaves_per_tree = 16;
  int phase1_only_trees = 12;
  int reused_trees = 4;
  double lut_budget = 0.0;  // <= 0 disables the check
};

/// Per pattern: among bursts with the row's best efficiency, the one with the
/// cheapest buffer; equal cost prefers the larger burst.
BurstChoice select_burst(const BandwidthProfile& profile, int pattern);
BurstSelection select_burst_sizes(const BandwidthProfile& profile, const BurstSelectionParams& params,
                                  const ResourceParams& resources = {});

}  // namespace hbmsort
