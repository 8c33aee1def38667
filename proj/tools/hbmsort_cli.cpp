// SPDX-License-Identifier: Apache-2.0
//
// hbmsort gen | sort | model | sweep | validate

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "hbmsort/config.hpp"
#include "hbmsort/dataset.hpp"
#include "hbmsort/error.hpp"
#include "hbmsort/report.hpp"
#include "hbmsort/sort_engine.hpp"

namespace {

using namespace hbmsort;

Config load(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

void emit(const Json& report, const std::string& path) {
  std::cout << render_text(report);
  if (path.empty()) return;
  if (path == "-") {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << report.dump(2) << '\n';
}

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase HBM merge sorter: functional sort, cycle model and analytics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string report_path;
  app.add_option("--config", config_path, "Config file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--report", report_path, "Write the JSON report here ('-' for stdout)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a dataset");
  std::uint64_t gen_n = 0;
  std::uint64_t seed = 0;
  std::string dist = "permutation";
  std::string gen_out;
  gen->add_option("--n", gen_n, "Record count")->required();
  gen->add_option("--seed", seed, "Shuffle seed");
  gen->add_option("--dist", dist, "permutation | uniform")->check(CLI::IsMember({"permutation", "uniform"}));
  gen->add_option("-o,--output", gen_out, "Output file")->required();

  // sort
  auto* sort = app.add_subcommand("sort", "Sort a dataset through both phases");
  std::string sort_in;
  std::string sort_out;
  std::string mode = "functional";
  int threads = default_threads();
  bool dry_run = false;
  std::uint64_t dry_n = 0;
  sort->add_option("input", sort_in, "Input dataset");
  sort->add_option("-o,--output", sort_out, "Sorted output file");
  sort->add_option("--mode", mode, "functional | cycles")->check(CLI::IsMember({"functional", "cycles"}));
  sort->add_option("--threads", threads, "Phase-1 worker threads")->check(CLI::PositiveNumber);
  sort->add_flag("--dry-run", dry_run, "Timing from the plan only; no data");
  sort->add_option("--n", dry_n, "Record count for --dry-run");

  auto* model = app.add_subcommand("model", "Analytic throughput, resource, floorplan and burst models");

  auto* sweep_cmd = app.add_subcommand("sweep", "Modeled throughput over power-of-two sizes");
  std::uint64_t sweep_min = std::uint64_t{1} << 22;
  std::uint64_t sweep_max = std::uint64_t{1} << 29;
  sweep_cmd->add_option("--min", sweep_min, "Smallest size in records");
  sweep_cmd->add_option("--max", sweep_max, "Largest size in records");

  auto* validate = app.add_subcommand("validate", "Check that a dataset holds keys 1..N in order");
  std::string val_in;
  bool sorted_only = false;
  validate->add_option("input", val_in, "Dataset")->required();
  validate->add_flag("--sorted-only", sorted_only, "Only check non-decreasing keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto records = generate_dataset({gen_n, parse_distribution(dist), seed});
      write_dataset(gen_out, records);
      std::cout << "wrote " << records.size() << " records to " << gen_out << '\n';
      return 0;
    }
    const Config cfg = load(config_path);
    if (model->parsed()) {
      emit(model_report(cfg), report_path);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      emit(sweep_report(cfg, sweep(cfg, power_of_two_sizes(sweep_min, sweep_max))), report_path);
      return 0;
    }
    if (validate->parsed()) {
      const auto records = read_dataset(val_in);
      VerifyResult v;
      if (sorted_only) {
        const auto it = std::is_sorted_until(records.begin(), records.end(), key_less);
        if (it != records.end()) {
          v = {false, static_cast<std::uint64_t>(it - records.begin()), "keys decrease"};
        }
      } else {
        v = verify_permutation(records, records.size());
      }
      std::cout << (v.ok ? "PASS" : "FAIL") << ' ' << val_in;
      if (!v.ok) std::cout << ": first bad index " << v.first_bad << " (" << v.message << ')';
      std::cout << '\n';
      return v.ok ? 0 : 1;
    }

    RunSummary run;
    run.mode = mode;
    run.dry_run = dry_run;
    if (dry_run) {
      if (dry_n == 0) throw std::invalid_argument("--dry-run needs --n");
      run.plan = plan_sort(dry_n, cfg.sort, cfg.hbm);
      run.timing = model_timing(run.plan, cfg);
      emit(run_report(cfg, run), report_path);
      return 0;
    }
    if (sort_in.empty()) throw std::invalid_argument("sort needs an input file (or --dry-run --n N)");
    const auto input = read_dataset(sort_in);
    EngineOptions opts;
    opts.threads = threads;
    opts.simulate = mode == "cycles";
    const SortResult res = sort_records(input, cfg, opts);
    run.plan = res.plan;
    run.timing = model_timing(res.plan, cfg);
    run.simulated_phase1_cycles = res.phase1.simulated_pass_cycles;
    run.simulated_phase2_cycles = res.phase2.simulated_cycles;
    const VerifyResult v = verify_stable_sort(input, res.output);
    run.valid = v.ok;
    run.validation_message = v.ok ? "output is the stable sort of the input" : v.message;
    if (!sort_out.empty()) write_dataset(sort_out, res.output);
    emit(run_report(cfg, run), report_path);
    return v.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
