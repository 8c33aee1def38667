// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/config.hpp"

#include <functional>
#include <map>

#include "hbmsort/error.hpp"
#include "hbmsort/kv.hpp"
#include "hbmsort/merge_net.hpp"

namespace hbmsort {

void SortConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("sort: " + m); };
  if (k != 16) fail("k must be 16 (one tree per channel pair)");
  if (l_phase1 < 4 || l_phase1 > 64 || !is_power_of_two(static_cast<std::uint64_t>(l_phase1))) {
    fail("l_phase1 must be a power of two in [4, 64]");
  }
  if (phase2_leaves != 4 * l_phase1) fail("phase2_leaves must be 4 * l_phase1");
  if (!is_valid_rate(p_phase1) || p_phase1 > l_phase1) fail("p_phase1 must be a valid rate no larger than l_phase1");
  if (p_phase2 != 4 * p_phase1 || !is_valid_rate(p_phase2)) fail("p_phase2 must be 4 * p_phase1 and at most 32");
  for (int b : {burst_phase1, burst_phase2}) {
    if (b < 64 || b > 4096 || !is_power_of_two(static_cast<std::uint64_t>(b))) {
      fail("burst sizes must be powers of two in [64, 4096]");
    }
  }
  if (batch_bytes < 8 || batch_bytes % 8 != 0) fail("batch_bytes must be a positive multiple of 8");
  if (!(clock_hz > 0)) fail("clock_hz must be positive");
  if (fifo_depth_blocks < 1) fail("fifo_depth_blocks must be at least 1");
}

void Config::validate() const {
  sort.validate();
  if (!(hbm.channel_bandwidth > 0)) throw ConfigError("hbm.channel_bandwidth must be positive");
  if (hbm.channel_capacity < 8) throw ConfigError("hbm.channel_capacity must hold at least one record");
  bandwidth.validate();
  if (floorplan.tree_cost <= 0 || floorplan.axi_width <= 0) {
    throw ConfigError("floorplan.tree_cost and floorplan.axi_width must be positive");
  }
}

namespace {

using Setter = std::function<void(Config&, const KvEntry&, const std::string&)>;

template <class T>
Setter int_field(T Config::*section, int T::*field) {
  return [=](Config& c, const KvEntry& e, const std::string& o) { c.*section.*field = static_cast<int>(kv_int(e, o)); };
}

template <class T>
Setter i64_field(T Config::*section, std::int64_t T::*field) {
  return [=](Config& c, const KvEntry& e, const std::string& o) { c.*section.*field = kv_int(e, o); };
}

template <class T>
Setter double_field(T Config::*section, double T::*field) {
  return [=](Config& c, const KvEntry& e, const std::string& o) { c.*section.*field = kv_double(e, o); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"sort.k", int_field(&Config::sort, &SortConfig::k)},
      {"sort.l_phase1", int_field(&Config::sort, &SortConfig::l_phase1)},
      {"sort.p_phase1", int_field(&Config::sort, &SortConfig::p_phase1)},
      {"sort.phase2_leaves", int_field(&Config::sort, &SortConfig::phase2_leaves)},
      {"sort.p_phase2", int_field(&Config::sort, &SortConfig::p_phase2)},
      {"sort.batch_bytes", int_field(&Config::sort, &SortConfig::batch_bytes)},
      {"sort.burst_phase1", int_field(&Config::sort, &SortConfig::burst_phase1)},
      {"sort.burst_phase2", int_field(&Config::sort, &SortConfig::burst_phase2)},
      {"sort.clock_hz", double_field(&Config::sort, &SortConfig::clock_hz)},
      {"sort.tuning", [](Config& c, const KvEntry& e, const std::string& o) { c.sort.tuning = kv_bool(e, o); }},
      {"sort.fifo_depth_blocks", int_field(&Config::sort, &SortConfig::fifo_depth_blocks)},
      {"sort.reset_cycles", int_field(&Config::sort, &SortConfig::reset_cycles)},
      {"hbm.channel_bandwidth", double_field(&Config::hbm, &HbmTopology::channel_bandwidth)},
      {"hbm.channel_capacity",
       [](Config& c, const KvEntry& e, const std::string& o) {
         const auto v = kv_int(e, o);
         if (v <= 0) kv_fail(e, o, "hbm.channel_capacity must be positive");
         c.hbm.channel_capacity = static_cast<std::uint64_t>(v);
       }},
      {"hbm.outstanding_bursts",
       [](Config& c, const KvEntry& e, const std::string& o) {
         c.bandwidth.outstanding_bursts = static_cast<int>(kv_int(e, o));
       }},
      {"resource.base_comparators",
       [](Config& c, const KvEntry& e, const std::string& o) {
         const auto v = kv_int(e, o);
         if (v < 0) kv_fail(e, o, "resource.base_comparators must be non-negative");
         c.resource.base_comparators = static_cast<std::uint64_t>(v);
       }},
      {"resource.lut_per_comparator", double_field(&Config::resource, &ResourceParams::lut_per_comparator)},
      {"resource.lut_buffer_fraction", double_field(&Config::resource, &ResourceParams::lut_buffer_fraction)},
      {"resource.axi_converter_luts", int_field(&Config::resource, &ResourceParams::axi_converter_luts)},
      {"resource.axi_converter_ffs", int_field(&Config::resource, &ResourceParams::axi_converter_ffs)},
      {"floorplan.tree_cost", i64_field(&Config::floorplan, &FloorplanProblem::tree_cost)},
      {"floorplan.die1_capacity", i64_field(&Config::floorplan, &FloorplanProblem::die1_capacity)},
      {"floorplan.die2_capacity", i64_field(&Config::floorplan, &FloorplanProblem::die2_capacity)},
      {"floorplan.axi_width", i64_field(&Config::floorplan, &FloorplanProblem::axi_width)},
      {"floorplan.crossing_budget", i64_field(&Config::floorplan, &FloorplanProblem::crossing_budget)},
      {"model.reference_phase1_gbps", double_field(&Config::model, &ModelReference::phase1_gbps)},
      {"model.reference_phase2_gbps", double_field(&Config::model, &ModelReference::phase2_gbps)},
      {"model.reference_passes", int_field(&Config::model, &ModelReference::phase1_passes)},
      {"model.bonsai_tree_gbps", double_field(&Config::model, &ModelReference::bonsai_tree_gbps)},
      {"model.bonsai_measured_gbps", double_field(&Config::model, &ModelReference::bonsai_measured_gbps)},
      {"model.bonsai_leaves", int_field(&Config::model, &ModelReference::bonsai_leaves)},
      {"model.scaled_tree_leaves", int_field(&Config::model, &ModelReference::scaled_tree_leaves)},
      {"model.table_tree1_luts", double_field(&Config::model, &ModelReference::table_tree1_luts)},
      {"model.table_tree4_luts", double_field(&Config::model, &ModelReference::table_tree4_luts)},
      {"model.lut_budget", double_field(&Config::model, &ModelReference::lut_budget)},
  };
  return table;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& origin) {
  Config cfg;
  bool profile_cleared = false;
  const std::string prefix = "bandwidth.";
  for (const KvEntry& e : parse_kv(text, origin)) {
    if (e.key.rfind(prefix, 0) == 0) {
      // Bandwidth rows replace the built-in table as a whole.
      if (!profile_cleared) {
        cfg.bandwidth.clear();
        profile_cleared = true;
      }
      KvEntry row = e;
      row.key = e.key.substr(prefix.size());
      if (row.key == "outstanding_bursts") kv_fail(e, origin, "use hbm.outstanding_bursts");
      cfg.bandwidth.apply(row, origin);
      continue;
    }
    const auto it = setters().find(e.key);
    if (it == setters().end()) kv_fail(e, origin, "unknown key '" + e.key + "'");
    it->second(cfg, e, origin);
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path), path.string()); }

}  // namespace hbmsort
