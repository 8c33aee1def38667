// SPDX-License-Identifier: Apache-2.0
//
// Machine-readable reports (JSON, stable key order) and a plain-text view.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hbmsort/config.hpp"
#include "hbmsort/sort_engine.hpp"

namespace hbmsort {

using Json = nlohmann::ordered_json;

/// Bumped whenever a field is renamed or removed.
inline constexpr int kReportSchemaVersion = 1;

Json config_json(const Config& cfg);

struct RunSummary {
  std::string mode = "functional";  // functional | cycles
  bool dry_run = false;
  SortPlan plan;
  TimingModel timing;
  std::vector<std::uint64_t> simulated_phase1_cycles;  // per pass, cycles mode only
  std::uint64_t simulated_phase2_cycles = 0;
  std::optional<bool> valid;  // unset when nothing was checked
  std::string validation_message;
};

/// Per-phase GB/s from the simulated cycles when present, else the model;
/// overall is always perf_overall of the two.
Json run_report(const Config& cfg, const RunSummary& run);

/// Analytic models: throughput equations, resources, floorplan, bursts.
Json model_report(const Config& cfg);

struct SweepRow {
  std::uint64_t n = 0;
  int phase1_passes = 0;
  double phase1_gbps = 0.0;
  double phase2_gbps = 0.0;
  double overall_gbps = 0.0;
  bool pass_increment = false;  // more phase-1 passes than the previous row
};

std::vector<SweepRow> sweep(const Config& cfg, const std::vector<std::uint64_t>& sizes);
/// Powers of two from `lo` to `hi` records inclusive.
std::vector<std::uint64_t> power_of_two_sizes(std::uint64_t lo, std::uint64_t hi);
Json sweep_report(const Config& cfg, const std::vector<SweepRow>& rows);

/// Indented `key: value` rendering for terminals.
std::string render_text(const Json& report);

}  // namespace hbmsort
