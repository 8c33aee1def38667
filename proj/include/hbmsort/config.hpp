// SPDX-License-Identifier: Apache-2.0
//
// Sorter configuration and its `key = value` file format.
#pragma once

#include <filesystem>
#include <string>

#include "hbmsort/analytics.hpp"
#include "hbmsort/hbm.hpp"

namespace hbmsort {

struct SortConfig {
  int k = 16;               // phase-1 trees, one per channel pair
  int l_phase1 = 16;        // leaves per phase-1 tree
  int p_phase1 = 8;         // records/cycle at a phase-1 root
  int phase2_leaves = 64;
  int p_phase2 = 32;
  int batch_bytes = 4096;   // phase-2 write batch
  int burst_phase1 = 1024;  // leaf burst of trees used only in phase 1
  int burst_phase2 = 4096;  // leaf burst of the reused trees
  double clock_hz = 214e6;
  bool tuning = true;       // cap phase-1 runs so phase-2 leaves stay busy
  int fifo_depth_blocks = 8;
  int reset_cycles = -1;    // negative: the unit's pipeline depth

  /// Sub-runs each channel contributes to phase 2.
  int subruns_per_channel() const { return phase2_leaves / k; }
  int batch_records() const { return batch_bytes / 8; }
  /// Input sizes are padded to a multiple of this.
  std::uint64_t granule() const { return 4 * static_cast<std::uint64_t>(l_phase1) * static_cast<std::uint64_t>(l_phase1); }
  /// Throws ConfigError when the parameters do not describe a supported sorter.
  void validate() const;
};

/// Reference numbers the model report compares against.
struct ModelReference {
  double phase1_gbps = 26.5;
  double phase2_gbps = 38.0;
  int phase1_passes = 6;
  double bonsai_tree_gbps = 32.0;
  double bonsai_measured_gbps = 7.1;
  int bonsai_leaves = 256;
  int scaled_tree_leaves = 256;
  double table_tree1_luts = 28788;
  double table_tree4_luts = 39195;
  double lut_budget = 0.0;
};

struct Config {
  SortConfig sort;
  HbmTopology hbm;
  BandwidthProfile bandwidth = BandwidthProfile::builtin();
  ResourceParams resource;
  FloorplanProblem floorplan{28788, 240000, 210000, 1600, 23040};
  ModelReference model;

  void validate() const;
};

/// Parses a config file. Keys are `section.name`; bandwidth entries are
/// `bandwidth.MxM,BYTES`. Unknown keys are errors. Missing keys keep defaults.
Config parse_config(const std::string& text, const std::string& origin = "<string>");
Config load_config(const std::filesystem::path& path);

}  // namespace hbmsort
