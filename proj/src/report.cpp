// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/report.hpp"

#include <cmath>
#include <sstream>

#include "hbmsort/analytics.hpp"

namespace hbmsort {

namespace {

constexpr double kGiga = 1e9;

Json phase_json(std::uint64_t cycles, double clock_hz, std::uint64_t n) {
  const double seconds = static_cast<double>(cycles) / clock_hz;
  Json j;
  j["cycles"] = cycles;
  j["seconds"] = seconds;
  j["gbps"] = seconds > 0 ? static_cast<double>(n) * sizeof(Record) / seconds / kGiga : 0.0;
  return j;
}

Json estimate_json(const ResourceEstimate& e, double reference) {
  Json j;
  j["p"] = e.p;
  j["comparators"] = e.comparators;
  j["lut_buffers"] = e.lut_buffers;
  j["buffer_luts"] = e.buffer_luts;
  j["luts"] = std::round(e.luts);
  j["ffs_axi_converter"] = e.ffs_axi;
  j["reference_luts"] = reference;
  j["relative_error"] = reference > 0 ? (e.luts - reference) / reference : 0.0;
  return j;
}

Json burst_json(const BurstChoice& c) {
  Json j;
  j["burst_bytes"] = c.burst_bytes;
  j["efficiency"] = c.efficiency;
  j["buffer_luts"] = c.buffer_luts;
  j["below_peak"] = c.below_peak;
  return j;
}

void render(std::ostringstream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (auto it = j.begin(); it != j.end(); ++it) {
    const Json& v = it.value();
    if (v.is_object()) {
      os << pad << it.key() << ":\n";
      render(os, v, indent + 1);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      os << pad << it.key() << ":\n";
      for (const Json& row : v) {
        os << pad << "  -";
        for (auto c = row.begin(); c != row.end(); ++c) {
          os << ' ' << c.key() << '=' << c.value().dump();
        }
        os << '\n';
      }
    } else {
      os << pad << it.key() << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }
  }
}

}  // namespace

Json config_json(const Config& cfg) {
  const SortConfig& s = cfg.sort;
  Json j;
  j["sort"] = {{"k", s.k},
               {"l_phase1", s.l_phase1},
               {"p_phase1", s.p_phase1},
               {"phase2_leaves", s.phase2_leaves},
               {"p_phase2", s.p_phase2},
               {"batch_bytes", s.batch_bytes},
               {"burst_phase1", s.burst_phase1},
               {"burst_phase2", s.burst_phase2},
               {"clock_hz", s.clock_hz},
               {"tuning", s.tuning},
               {"fifo_depth_blocks", s.fifo_depth_blocks},
               {"reset_cycles", s.reset_cycles}};
  j["hbm"] = {{"channel_bandwidth", cfg.hbm.channel_bandwidth},
              {"channel_capacity", cfg.hbm.channel_capacity},
              {"outstanding_bursts", cfg.bandwidth.outstanding_bursts}};
  Json bw = Json::object();
  for (const auto& [key, eff] : cfg.bandwidth.table()) {
    bw[std::to_string(key.first) + "x" + std::to_string(key.first) + "," + std::to_string(key.second)] = eff;
  }
  j["bandwidth"] = bw;
  j["resource"] = {{"base_comparators", cfg.resource.base_comparators},
                   {"lut_per_comparator", cfg.resource.lut_per_comparator},
                   {"lut_buffer_fraction", cfg.resource.lut_buffer_fraction},
                   {"axi_converter_luts", cfg.resource.axi_converter_luts},
                   {"axi_converter_ffs", cfg.resource.axi_converter_ffs}};
  j["floorplan"] = {{"tree_cost", cfg.floorplan.tree_cost},
                    {"die1_capacity", cfg.floorplan.die1_capacity},
                    {"die2_capacity", cfg.floorplan.die2_capacity},
                    {"axi_width", cfg.floorplan.axi_width},
                    {"crossing_budget", cfg.floorplan.crossing_budget}};
  return j;
}

Json run_report(const Config& cfg, const RunSummary& run) {
  const double clock = cfg.sort.clock_hz;
  const std::uint64_t n = run.plan.n;
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sort";
  j["mode"] = run.mode;
  j["dry_run"] = run.dry_run;
  j["config"] = config_json(cfg);

  Json plan;
  plan["n"] = n;
  plan["padded_n"] = run.plan.padded_n;
  plan["per_channel"] = run.plan.per_channel;
  plan["subrun"] = run.plan.subrun;
  plan["tuned"] = run.plan.tuned;
  plan["phase1_passes"] = run.plan.phase1_passes;
  plan["run_lengths"] = run.plan.run_lengths();
  j["plan"] = plan;

  // The model estimate depends only on the plan, so it is identical for
  // dry runs and materialized runs.
  Json p1 = phase_json(run.timing.phase1.cycles, clock, n);
  p1["pass_cycles"] = run.timing.phase1.pass_cycles;
  p1["skewed_cycles"] = run.timing.phase1.skewed_cycles;
  Json p2 = phase_json(run.timing.phase2.cycles, clock, n);
  p2["skewed_cycles"] = run.timing.phase2.skewed_cycles;

  double g1 = p1["gbps"].get<double>();
  double g2 = p2["gbps"].get<double>();
  const bool simulated = !run.simulated_phase1_cycles.empty();
  if (simulated) {
    std::uint64_t total = 0;
    for (auto c : run.simulated_phase1_cycles) total += c;
    Json s1 = phase_json(total, clock, n);
    s1["pass_cycles"] = run.simulated_phase1_cycles;
    Json s2 = phase_json(run.simulated_phase2_cycles, clock, n);
    p1["simulated"] = s1;
    p2["simulated"] = s2;
    g1 = s1["gbps"].get<double>();
    g2 = s2["gbps"].get<double>();
  }
  Json perf;
  perf["source"] = simulated ? "simulation" : "model";
  perf["phase1"] = p1;
  perf["phase2"] = p2;
  perf["phase1_gbps"] = g1;
  perf["phase2_gbps"] = g2;
  perf["overall_gbps"] = g1 > 0 && g2 > 0 ? perf_overall(g1, g2) : 0.0;
  perf["bandwidth_utilization_gbps"] = bandwidth_utilization(g1, run.plan.phase1_passes);
  j["performance"] = perf;

  Json v;
  if (run.valid.has_value()) {
    v["checked"] = true;
    v["ok"] = *run.valid;
  } else {
    v["checked"] = false;
  }
  v["message"] = run.validation_message;
  j["validation"] = v;
  return j;
}

Json model_report(const Config& cfg) {
  const SortConfig& s = cfg.sort;
  const ModelReference& ref = cfg.model;
  const double beta_channel = cfg.hbm.channel_bandwidth;
  const std::uint64_t n_max = kSortAxis * (cfg.hbm.channel_capacity / sizeof(Record));

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "model";
  j["config"] = config_json(cfg);

  Json ref_perf;
  ref_perf["phase1_gbps"] = ref.phase1_gbps;
  ref_perf["phase2_gbps"] = ref.phase2_gbps;
  ref_perf["overall_gbps"] = perf_overall(ref.phase1_gbps, ref.phase2_gbps);
  ref_perf["phase1_passes"] = ref.phase1_passes;
  ref_perf["bandwidth_utilization_gbps"] = bandwidth_utilization(ref.phase1_gbps, ref.phase1_passes);
  j["reference"] = ref_perf;

  const SortPlan plan = plan_sort(n_max, s, cfg.hbm);
  const TimingModel tm = model_timing(plan, cfg);
  Json eq;
  eq["n"] = n_max;
  eq["untuned_passes"] = ceil_log(n_max / static_cast<std::uint64_t>(s.k), static_cast<std::uint64_t>(s.l_phase1));
  eq["tuned_passes"] = plan.phase1_passes;
  eq["phase1_formula_gbps"] = perf_phase1(n_max, s.k, s.l_phase1, beta_channel) / kGiga;
  eq["phase1_tuned_formula_gbps"] = perf_phase1_with_passes(plan.phase1_passes, s.k, beta_channel) / kGiga;
  eq["phase1_model_gbps"] = tm.phase1.gbps;
  eq["phase2_model_gbps"] = tm.phase2.gbps;
  eq["overall_model_gbps"] = perf_overall(tm.phase1.gbps, tm.phase2.gbps);
  eq["bandwidth_utilization_gbps"] = bandwidth_utilization(tm.phase1.gbps, plan.phase1_passes);
  j["throughput"] = eq;

  Json single;
  single["leaves"] = ref.scaled_tree_leaves;
  single["passes"] = ceil_log(n_max, static_cast<std::uint64_t>(ref.scaled_tree_leaves));
  single["reference_gbps"] = perf_single_tree(n_max, ref.scaled_tree_leaves, ref.phase2_gbps * kGiga) / kGiga;
  single["model_gbps"] = perf_single_tree(n_max, ref.scaled_tree_leaves, tm.phase2.gbps * kGiga) / kGiga;
  single["bonsai_passes"] = ceil_log(n_max, static_cast<std::uint64_t>(ref.bonsai_leaves));
  single["bonsai_gbps"] = perf_single_tree(n_max, ref.bonsai_leaves, ref.bonsai_tree_gbps * kGiga) / kGiga;
  single["bonsai_measured_gbps"] = ref.bonsai_measured_gbps;
  j["single_tree"] = single;

  Json res;
  Json rec = Json::array();
  for (int p = 1; p <= 32; p *= 2) {
    const auto lp = recurrence_comparators(p, cfg.resource.base_comparators);
    Json row;
    row["p"] = p;
    row["comparators"] = lp;
    if (p > 1 && recurrence_comparators(p / 2, cfg.resource.base_comparators) > 0) {
      const auto half = recurrence_comparators(p / 2, cfg.resource.base_comparators);
      row["growth"] = static_cast<double>(lp) / static_cast<double>(half);
    }
    rec.push_back(row);
  }
  res["recurrence"] = rec;
  const TreeSpec tree = build_tree(s.p_phase1, s.l_phase1);
  res["tree1"] = estimate_json(tree_resources(tree, s.burst_phase1, cfg.resource), ref.table_tree1_luts);
  res["tree4"] = estimate_json(tree_resources(tree, s.burst_phase2, cfg.resource), ref.table_tree4_luts);
  j["resources"] = res;

  const FloorplanSolution fp = floorplan_solve(cfg.floorplan);
  j["floorplan"] = {{"u1", fp.u1}, {"u2", fp.u2}, {"objective", fp.objective}};

  BurstSelectionParams bp;
  bp.leaves_per_tree = s.l_phase1;
  bp.lut_budget = ref.lut_budget;
  const BurstSelection sel = select_burst_sizes(cfg.bandwidth, bp, cfg.resource);
  Json bursts;
  bursts["phase1"] = burst_json(sel.phase1);
  bursts["phase2"] = burst_json(sel.phase2);
  bursts["total_buffer_luts"] = sel.total_buffer_luts;
  bursts["over_budget"] = sel.over_budget;
  bursts["warnings"] = sel.warnings;
  j["bursts"] = bursts;
  return j;
}

std::vector<std::uint64_t> power_of_two_sizes(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = lo; n <= hi && n != 0; n *= 2) out.push_back(n);
  return out;
}

std::vector<SweepRow> sweep(const Config& cfg, const std::vector<std::uint64_t>& sizes) {
  std::vector<SweepRow> rows;
  for (std::uint64_t n : sizes) {
    const SortPlan plan = plan_sort(n, cfg.sort, cfg.hbm);
    const TimingModel tm = model_timing(plan, cfg);
    SweepRow r;
    r.n = n;
    r.phase1_passes = plan.phase1_passes;
    r.phase1_gbps = tm.phase1.gbps;
    r.phase2_gbps = tm.phase2.gbps;
    r.overall_gbps = perf_overall(tm.phase1.gbps, tm.phase2.gbps);
    r.pass_increment = !rows.empty() && r.phase1_passes > rows.back().phase1_passes;
    rows.push_back(r);
  }
  return rows;
}

Json sweep_report(const Config& cfg, const std::vector<SweepRow>& rows) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "sweep";
  j["config"] = config_json(cfg);
  Json table = Json::array();
  for (const auto& r : rows) {
    Json row;
    row["n"] = r.n;
    row["bytes"] = r.n * sizeof(Record);
    row["phase1_passes"] = r.phase1_passes;
    row["phase1_gbps"] = r.phase1_gbps;
    row["phase2_gbps"] = r.phase2_gbps;
    row["overall_gbps"] = r.overall_gbps;
    row["pass_increment"] = r.pass_increment;
    table.push_back(row);
  }
  j["rows"] = table;
  return j;
}

std::string render_text(const Json& report) {
  std::ostringstream os;
  render(os, report, 0);
  return os.str();
}

}  // namespace hbmsort
