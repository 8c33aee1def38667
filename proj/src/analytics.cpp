// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hbmsort/error.hpp"
#include "hbmsort/merge_net.hpp"

namespace hbmsort {

int ceil_log(std::uint64_t n, std::uint64_t base) {
  if (base < 2) throw std::invalid_argument("logarithm base must be at least 2");
  int j = 0;
  std::uint64_t reach = 1;
  while (reach < n) {
    if (reach > UINT64_MAX / base) return j + 1;
    reach *= base;
    ++j;
  }
  return j;
}

double perf_single_tree(std::uint64_t n, int l, double beta_memory) {
  if (n < static_cast<std::uint64_t>(l)) throw std::invalid_argument("need N >= l");
  return beta_memory / ceil_log(n, static_cast<std::uint64_t>(l));
}

double perf_phase1(std::uint64_t n, int k, int l, double beta_channel) {
  if (k < 1) throw std::invalid_argument("need at least one tree");
  return perf_phase1_with_passes(ceil_log(n / static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)), k,
                                 beta_channel);
}

double perf_phase1_with_passes(int passes, int k, double beta_channel) {
  if (passes < 1) throw std::invalid_argument("need at least one pass");
  return k * beta_channel / passes;
}

double perf_overall(double beta_phase1, double beta_phase2) {
  if (!(beta_phase1 > 0.0) || !(beta_phase2 > 0.0)) throw std::invalid_argument("bandwidths must be positive");
  return 1.0 / (1.0 / beta_phase1 + 1.0 / beta_phase2);
}

double bandwidth_utilization(double beta_phase1, int passes) { return beta_phase1 * passes * 2.0; }

std::uint64_t recurrence_comparators(int p, std::uint64_t base) {
  require_valid_rate(p);
  if (p == 1) return base;
  return 2 * recurrence_comparators(p / 2, base) + static_cast<std::uint64_t>(mms_stats(p).comparators);
}

int leaf_buffer_luts(int burst_bytes) {
  if (burst_bytes < 64 || burst_bytes % 64 != 0) throw std::invalid_argument("burst must be a multiple of 64 bytes");
  const int words = 2 * burst_bytes / 64;  // two bursts of 512-bit words
  return 512 * ((words + 31) / 32);
}

int lut_buffer_count(int leaves, const ResourceParams& params) {
  return static_cast<int>(std::lround(leaves * params.lut_buffer_fraction));
}

ResourceEstimate resource_tree(int p, const ResourceParams& params) {
  ResourceEstimate r;
  r.p = p;
  r.comparators = recurrence_comparators(p, params.base_comparators);
  r.luts = static_cast<double>(r.comparators) * params.lut_per_comparator + params.axi_converter_luts;
  r.ffs_axi = params.axi_converter_ffs;
  return r;
}

ResourceEstimate tree_resources(const TreeSpec& tree, int burst_bytes, const ResourceParams& params) {
  ResourceEstimate r;
  r.p = tree.p;
  r.comparators = static_cast<std::uint64_t>(tree.comparators());
  r.lut_buffers = lut_buffer_count(tree.leaves(), params);
  r.buffer_luts = r.lut_buffers * leaf_buffer_luts(burst_bytes);
  r.luts = static_cast<double>(r.comparators) * params.lut_per_comparator + r.buffer_luts + params.axi_converter_luts;
  r.ffs_axi = params.axi_converter_ffs;
  return r;
}

double calibrate_lut_per_comparator(const TreeSpec& tree, int burst_bytes, double measured_luts,
                                    const ResourceParams& params) {
  ResourceParams zero = params;
  zero.lut_per_comparator = 0.0;
  const ResourceEstimate fixed = tree_resources(tree, burst_bytes, zero);
  return (measured_luts - fixed.luts) / static_cast<double>(fixed.comparators);
}

FloorplanSolution floorplan_solve(const FloorplanProblem& prob) {
  if (prob.tree_cost <= 0 || prob.axi_width <= 0) throw std::invalid_argument("tree cost and AXI width must be positive");
  FloorplanSolution best;
  const std::int64_t max1 = std::max<std::int64_t>(prob.die1_capacity / prob.tree_cost, 0);
  const std::int64_t max2 = std::max<std::int64_t>(prob.die2_capacity / prob.tree_cost, 0);
  for (std::int64_t u1 = 0; u1 <= max1; ++u1) {
    for (std::int64_t u2 = 0; u2 <= max2; ++u2) {
      if ((u1 + u2) * prob.axi_width > prob.crossing_budget) continue;
      const std::int64_t obj = u1 + u2;
      if (obj > best.objective || (obj == best.objective && u1 > best.u1)) best = {u1, u2, obj};
    }
  }
  return best;
}

BurstChoice select_burst(const BandwidthProfile& profile, int pattern) {
  const auto bursts = profile.bursts(pattern);
  if (bursts.empty()) {
    throw ConfigError("bandwidth profile has no entries for pattern " + std::to_string(pattern) + "x" +
                      std::to_string(pattern));
  }
  double best = 0.0;
  for (int b : bursts) best = std::max(best, profile.efficiency(pattern, b));
  BurstChoice choice;
  for (int b : bursts) {
    const double eff = profile.efficiency(pattern, b);
    if (eff < best) continue;
    const int cost = leaf_buffer_luts(b);
    if (choice.burst_bytes == 0 || cost < choice.buffer_luts || (cost == choice.buffer_luts && b > choice.burst_bytes)) {
      choice = {b, eff, cost, false};
    }
  }
  choice.below_peak = best < 0.95;
  return choice;
}

BurstSelection select_burst_sizes(const BandwidthProfile& profile, const BurstSelectionParams& params,
                                  const ResourceParams& resources) {
  BurstSelection sel;
  sel.phase1 = select_burst(profile, 1);
  sel.phase2 = select_burst(profile, 4);
  for (const auto* c : {&sel.phase1, &sel.phase2}) {
    if (c->below_peak) {
      sel.warnings.push_back("no burst size reaches 95% efficiency for pattern " +
                             std::string(c == &sel.phase1 ? "1x1" : "4x4"));
    }
  }
  const std::int64_t per_tree = lut_buffer_count(params.leaves_per_tree, resources);
  sel.total_buffer_luts = per_tree * (params.phase1_only_trees * std::int64_t{sel.phase1.buffer_luts} +
                                      params.reused_trees * std::int64_t{sel.phase2.buffer_luts});
  if (params.lut_budget > 0.0 && static_cast<double>(sel.total_buffer_luts) > params.lut_budget) {
    sel.over_budget = true;
    sel.warnings.push_back("leaf buffers need " + std::to_string(sel.total_buffer_luts) + " LUTs, over the budget");
  }
  return sel;
}

}  // namespace hbmsort
