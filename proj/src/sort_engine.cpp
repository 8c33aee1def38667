// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/sort_engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hbmsort/analytics.hpp"
#include "hbmsort/error.hpp"

namespace hbmsort {

namespace {

constexpr int kTrees = 16;

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Runs fn(i) for i in [0, n) on up to `threads` threads; rethrows the first error.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  const int workers = std::clamp(threads, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool is_reused_tree(int tree) { return tree % 4 == 0; }

int tree_burst(const SortConfig& cfg, int tree) { return is_reused_tree(tree) ? cfg.burst_phase2 : cfg.burst_phase1; }

double records_per_cycle(double bytes_per_sec, const SortConfig& cfg) {
  return bytes_per_sec / (static_cast<double>(sizeof(Record)) * cfg.clock_hz);
}

/// Visits every merge group of one pass inside one channel: fn(out_start,
/// out_len, in_run).
template <class Fn>
void for_each_group(const SortPlan& plan, const PassPlan& pass, Fn&& fn) {
  for (std::uint64_t blk = 0; blk < plan.per_channel; blk += pass.block) {
    const std::uint64_t blk_end = std::min(blk + pass.block, plan.per_channel);
    for (std::uint64_t start = blk; start < blk_end; start += pass.out_run) {
      fn(start, std::min(pass.out_run, blk_end - start));
    }
  }
}

/// Leaf spans of one group: the k input runs are spread over the leaves with
/// leaf = floor(j * leaves / k), which keeps input order across leaves.
void group_leaves(std::span<const Record> src, std::uint64_t start, std::uint64_t len, std::uint64_t in_run,
                  std::vector<std::span<const Record>>& leaves) {
  const std::size_t l = leaves.size();
  std::fill(leaves.begin(), leaves.end(), std::span<const Record>{});
  const std::uint64_t k = ceil_div(len, in_run);
  if (k > l) throw std::logic_error("merge group wider than the tree");
  for (std::uint64_t j = 0; j < k; ++j) {
    const std::uint64_t a = start + j * in_run;
    const std::uint64_t b = std::min(a + in_run, start + len);
    leaves[static_cast<std::size_t>(j * l / k)] = src.subspan(a, b - a);
  }
}

TreeSimOptions sim_options(const SortConfig& cfg, double read_rate, double write_rate, int burst_bytes,
                           std::vector<int> leaf_channel) {
  TreeSimOptions o;
  o.fifo_depth_blocks = cfg.fifo_depth_blocks;
  o.reset_cycles = cfg.reset_cycles;
  o.sink_rate = write_rate;
  o.channel_feed = ChannelFeed{std::move(leaf_channel), read_rate, burst_bytes / static_cast<int>(sizeof(Record))};
  return o;
}

}  // namespace

std::vector<std::uint64_t> SortPlan::run_lengths() const {
  std::vector<std::uint64_t> out;
  for (const auto& p : passes) out.push_back(p.out_run);
  return out;
}

SortPlan plan_sort(std::uint64_t n, const SortConfig& cfg, const HbmTopology& topo) {
  cfg.validate();
  if (n == 0) throw std::invalid_argument("nothing to sort");
  const std::uint64_t g = cfg.granule();
  const auto l = static_cast<std::uint64_t>(cfg.l_phase1);
  SortPlan plan;
  plan.n = n;
  plan.padded_n = ceil_div(n, g) * g;
  const std::uint64_t capacity_records = topo.channel_capacity / sizeof(Record);
  if (plan.padded_n > kTrees * capacity_records) {
    throw CapacityError("sorting " + std::to_string(n) + " records needs " +
                        std::to_string(plan.padded_n * sizeof(Record)) + " bytes; 16 channels hold " +
                        std::to_string(kTrees * capacity_records * sizeof(Record)) + " bytes");
  }
  plan.per_channel = plan.padded_n / kTrees;
  plan.subruns_per_channel = cfg.subruns_per_channel();
  plan.subrun = plan.per_channel / static_cast<std::uint64_t>(plan.subruns_per_channel);
  plan.tuned = cfg.tuning;
  const std::uint64_t target = plan.tuned ? plan.subrun / l : plan.per_channel;
  std::uint64_t run = 1;
  while (run < target) {
    const std::uint64_t next = std::min(run * l, target);
    plan.passes.push_back({target, run, next});
    run = next;
  }
  if (plan.tuned) plan.passes.push_back({plan.subrun, target, plan.subrun});
  plan.phase1_passes = static_cast<int>(plan.passes.size());
  return plan;
}

void load_input(const SortPlan& plan, std::span<const Record> input, HbmStorage& storage) {
  if (input.size() != plan.n) throw std::invalid_argument("input length does not match the plan");
  const Record pad{kMaxKey, kMaxKey};
  for (int t = 0; t < kTrees; ++t) {
    storage.clear(phase1_read_channel(t, 0));
    auto dst = storage.reserve(phase1_read_channel(t, 0), plan.per_channel);
    const std::uint64_t begin = static_cast<std::uint64_t>(t) * plan.per_channel;
    for (std::uint64_t i = 0; i < plan.per_channel; ++i) {
      const std::uint64_t src = begin + i;
      dst[i] = src < plan.n ? input[src] : pad;
    }
  }
}

Phase1Stats run_phase1(const Config& cfg, const SortPlan& plan, HbmStorage& storage, const EngineOptions& opts) {
  const SortConfig& sc = cfg.sort;
  Phase1Stats stats;
  const TreeSpec base = build_tree(sc.p_phase1, sc.l_phase1);
  std::vector<FunctionalMerger> mergers;
  for (int t = 0; t < kTrees; ++t) mergers.emplace_back(base.levels);
  for (int t = 0; t < kTrees; ++t) storage.reserve(phase1_write_channel(t, 0), plan.per_channel);

  for (int pass = 0; pass < plan.phase1_passes; ++pass) {
    const PassPlan& pp = plan.passes[static_cast<std::size_t>(pass)];
    std::vector<std::uint64_t> sim_cycles(kTrees, 0);
    parallel_for(kTrees, opts.threads, [&](int t) {
      const auto src = storage.read(phase1_read_channel(t, pass), 0, plan.per_channel);
      auto dst = storage.reserve(phase1_write_channel(t, pass), plan.per_channel);
      std::vector<std::span<const Record>> leaves(static_cast<std::size_t>(sc.l_phase1));
      for_each_group(plan, pp, [&](std::uint64_t start, std::uint64_t len) {
        group_leaves(src, start, len, pp.in_run, leaves);
        mergers[static_cast<std::size_t>(t)].merge_group(leaves, dst.subspan(start, len));
      });
      if (!opts.simulate) return;
      const int burst = tree_burst(sc, t);
      const double rate = records_per_cycle(pattern_rate(1, burst, cfg.bandwidth, cfg.hbm), sc);
      std::vector<std::vector<std::span<const Record>>> leaf_runs(static_cast<std::size_t>(sc.l_phase1));
      for_each_group(plan, pp, [&](std::uint64_t start, std::uint64_t len) {
        group_leaves(src, start, len, pp.in_run, leaves);
        for (std::size_t i = 0; i < leaves.size(); ++i) leaf_runs[i].push_back(leaves[i]);
      });
      const TreeSpec tree = build_tree(sc.p_phase1, sc.l_phase1, burst);
      const auto res = simulate_groups(tree.levels, tree.leaf_buffer_depth, leaf_runs, {},
                                       sim_options(sc, rate, rate, burst, std::vector<int>(leaf_runs.size(), 0)));
      if (!std::equal(res.output.begin(), res.output.end(), dst.begin(), dst.end())) {
        throw std::logic_error("cycle simulation diverged from the functional merge in tree " + std::to_string(t));
      }
      sim_cycles[static_cast<std::size_t>(t)] = res.cycles;
    });
    ++stats.passes;
    if (opts.simulate) stats.simulated_pass_cycles.push_back(*std::max_element(sim_cycles.begin(), sim_cycles.end()));
  }
  return stats;
}

std::vector<std::span<const Record>> phase1_subruns(const SortPlan& plan, const HbmStorage& storage, int tree) {
  const auto data = storage.read(phase1_result_channel(tree, plan.phase1_passes), 0, plan.per_channel);
  std::vector<std::span<const Record>> out;
  for (int s = 0; s < plan.subruns_per_channel; ++s) {
    out.push_back(data.subspan(static_cast<std::size_t>(s) * plan.subrun, plan.subrun));
  }
  return out;
}

BatchedOutput make_batches(std::span<const Record> stream, std::size_t batch_records, std::vector<int> channels) {
  if (batch_records == 0) throw std::invalid_argument("batch size must be positive");
  if (channels.empty()) throw std::invalid_argument("need at least one output channel");
  BatchedOutput out;
  out.batch_records = batch_records;
  out.total_records = stream.size();
  out.streams.resize(channels.size());
  out.channels = std::move(channels);
  for (std::size_t b = 0, pos = 0; pos < stream.size(); ++b, pos += batch_records) {
    const std::size_t len = std::min(batch_records, stream.size() - pos);
    auto& dst = out.streams[b % out.streams.size()];
    dst.insert(dst.end(), stream.begin() + static_cast<std::ptrdiff_t>(pos),
               stream.begin() + static_cast<std::ptrdiff_t>(pos + len));
  }
  return out;
}

BatchedOutput run_phase2(const Config& cfg, const SortPlan& plan, HbmStorage& storage, const EngineOptions& opts,
                         Phase2Stats* stats) {
  const SortConfig& sc = cfg.sort;
  auto sub = std::make_shared<const TreeSpec>(build_tree(sc.p_phase1, sc.l_phase1, sc.burst_phase2));
  const TreeSpec wide = compose_wide_tree({sub, sub, sub, sub}).flatten();
  const auto n_leaves = static_cast<std::size_t>(wide.leaves());
  if (n_leaves != static_cast<std::size_t>(kTrees * plan.subruns_per_channel)) {
    throw std::invalid_argument("phase-2 leaf count does not match the phase-1 sub-runs");
  }
  std::vector<std::span<const Record>> leaves(n_leaves);
  std::vector<int> leaf_channel(n_leaves);
  for (int t = 0; t < kTrees; ++t) {
    const auto subs = phase1_subruns(plan, storage, t);
    for (int s = 0; s < plan.subruns_per_channel; ++s) {
      const auto leaf = static_cast<std::size_t>(phase2_leaf(t, s, plan.subruns_per_channel));
      leaves[leaf] = subs[static_cast<std::size_t>(s)];
      leaf_channel[leaf] = t;
      if (!std::is_sorted(leaves[leaf].begin(), leaves[leaf].end(), key_less)) {
        throw UnsortedFeedError(leaf, "phase-2 feed " + std::to_string(leaf) + " is not sorted");
      }
    }
  }
  std::vector<Record> root(plan.padded_n);
  FunctionalMerger merger(wide.levels);
  merger.merge_group(leaves, std::span<Record>(root));

  if (opts.simulate) {
    const double pattern = pattern_rate(4, sc.burst_phase2, cfg.bandwidth, cfg.hbm);
    const double per_channel = records_per_cycle(pattern / 4.0, sc);
    const double write = records_per_cycle(pattern, sc);
    std::vector<std::vector<std::span<const Record>>> leaf_runs(n_leaves);
    for (std::size_t i = 0; i < n_leaves; ++i) leaf_runs[i].push_back(leaves[i]);
    const auto res = simulate_groups(wide.levels, wide.leaf_buffer_depth, leaf_runs, {},
                                     sim_options(sc, per_channel, write, sc.burst_phase2, leaf_channel));
    if (res.output != root) throw std::logic_error("cycle simulation diverged from the functional merge in phase 2");
    if (stats != nullptr) stats->simulated_cycles = res.cycles;
  }

  const auto order = phase2_visit_order(plan.phase1_passes);
  BatchedOutput batches = make_batches(root, static_cast<std::size_t>(sc.batch_records()),
                                       std::vector<int>(order.begin(), order.end()));
  for (std::size_t v = 0; v < batches.channels.size(); ++v) {
    storage.clear(batches.channels[v]);
    storage.write(batches.channels[v], 0, batches.streams[v]);
  }
  return batches;
}

std::vector<Record> reconstruct_output(const BatchedOutput& out) {
  const std::size_t slots = out.streams.size();
  if (out.batch_records == 0) throw std::invalid_argument("batch size must be positive");
  std::vector<Record> result;
  if (out.total_records == 0) return result;
  if (slots == 0) throw IntegrityError(0, "batch 0 is missing: no output streams");
  result.reserve(out.total_records);
  std::vector<std::size_t> pos(slots, 0);
  std::size_t b = 0;
  for (; result.size() < out.total_records; ++b) {
    const std::size_t v = b % slots;
    const auto& s = out.streams[v];
    const std::size_t need = std::min<std::uint64_t>(out.batch_records, out.total_records - result.size());
    const std::size_t avail = s.size() - pos[v];
    if (avail == 0) throw IntegrityError(b, "batch " + std::to_string(b) + " is missing");
    if (avail < need) {
      throw IntegrityError(b, "batch " + std::to_string(b) + " is short: " + std::to_string(avail) + " of " +
                                  std::to_string(need) + " records");
    }
    result.insert(result.end(), s.begin() + static_cast<std::ptrdiff_t>(pos[v]),
                  s.begin() + static_cast<std::ptrdiff_t>(pos[v] + need));
    pos[v] += need;
  }
  for (std::size_t v = 0; v < slots; ++v) {
    if (pos[v] != out.streams[v].size()) {
      throw IntegrityError(b, "unexpected data after the last batch in slot " + std::to_string(v));
    }
  }
  return result;
}

VerifyResult verify_permutation(std::span<const Record> output, std::uint64_t n) {
  if (output.size() != n) {
    return {false, std::min<std::uint64_t>(output.size(), n),
            "expected " + std::to_string(n) + " records, got " + std::to_string(output.size())};
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    if (output[i].key != i + 1) {
      return {false, i,
              "index " + std::to_string(i) + " holds key " + std::to_string(output[i].key) + ", expected " +
                  std::to_string(i + 1)};
    }
  }
  return {};
}

VerifyResult verify_stable_sort(std::span<const Record> input, std::span<const Record> output) {
  std::vector<Record> expect(input.begin(), input.end());
  std::stable_sort(expect.begin(), expect.end(), key_less);
  if (expect.size() != output.size()) {
    return {false, std::min(expect.size(), output.size()), "length mismatch"};
  }
  for (std::size_t i = 0; i < expect.size(); ++i) {
    if (!(expect[i] == output[i])) return {false, i, "mismatch at index " + std::to_string(i)};
  }
  return {};
}

// ---------------------------------------------------------------------------

PassShape phase1_pass_shape(const SortPlan& plan, int pass, int leaves) {
  const PassPlan& pp = plan.passes.at(static_cast<std::size_t>(pass));
  const std::uint64_t blocks = plan.per_channel / pp.block;
  auto shape_of = [&](std::uint64_t len) {
    GroupShape g;
    g.leaf_len.assign(static_cast<std::size_t>(leaves), 0);
    const std::uint64_t k = ceil_div(len, pp.in_run);
    for (std::uint64_t j = 0; j < k; ++j) {
      g.leaf_len[static_cast<std::size_t>(j * static_cast<std::uint64_t>(leaves) / k)] =
          j + 1 < k ? pp.in_run : len - (k - 1) * pp.in_run;
    }
    return g;
  };
  PassShape shape;
  const std::uint64_t full = pp.block / pp.out_run;
  const std::uint64_t tail = pp.block % pp.out_run;
  if (full > 0) {
    shape.groups.push_back(shape_of(pp.out_run));
    shape.groups.back().repeat = blocks * full;
  }
  if (tail > 0) {
    shape.groups.push_back(shape_of(tail));
    shape.groups.back().repeat = blocks;
  }
  return shape;
}

PassShape phase2_shape(const SortPlan& plan, int leaves) {
  PassShape shape;
  GroupShape g;
  g.leaf_len.assign(static_cast<std::size_t>(leaves), plan.subrun);
  shape.groups.push_back(std::move(g));
  if (!plan.tuned) {
    // Sub-runs of one channel are consecutive slices of one sorted sequence.
    shape.leaf_class.resize(static_cast<std::size_t>(leaves));
    for (int i = 0; i < leaves; ++i) shape.leaf_class[static_cast<std::size_t>(i)] = i / plan.subruns_per_channel;
  }
  return shape;
}

TimingModel model_timing(const SortPlan& plan, const Config& cfg) {
  const SortConfig& sc = cfg.sort;
  TimingModel tm;
  const TreeLevels levels1 = build_tree(sc.p_phase1, sc.l_phase1).levels;
  double rate_min = 0.0;
  for (int pass = 0; pass < plan.phase1_passes; ++pass) {
    const PassShape shape = phase1_pass_shape(plan, pass, sc.l_phase1);
    std::uint64_t worst = 0;
    std::uint64_t worst_skew = 0;
    for (int burst : {sc.burst_phase1, sc.burst_phase2}) {
      const double rate = records_per_cycle(pattern_rate(1, burst, cfg.bandwidth, cfg.hbm), sc);
      const PassEstimate est = estimate_pass(levels1, shape, {rate, rate, sc.reset_cycles});
      worst = std::max(worst, est.cycles);
      worst_skew = std::max(worst_skew, est.skewed_cycles);
      rate_min = rate_min == 0.0 ? rate : std::min(rate_min, rate);
      tm.phase1.active_rate = est.active_rate;
    }
    tm.phase1.pass_cycles.push_back(worst);
    tm.phase1.cycles += worst;
    tm.phase1.skewed_cycles += worst_skew;
  }
  tm.phase1.read_rate = rate_min;
  tm.phase1.write_rate = rate_min;

  auto sub = std::make_shared<const TreeSpec>(build_tree(sc.p_phase1, sc.l_phase1, sc.burst_phase2));
  const TreeSpec wide = compose_wide_tree({sub, sub, sub, sub}).flatten();
  const double pattern = pattern_rate(4, sc.burst_phase2, cfg.bandwidth, cfg.hbm);
  tm.phase2.read_rate = records_per_cycle(4.0 * pattern, sc);
  tm.phase2.write_rate = records_per_cycle(pattern, sc);
  const PassEstimate est2 = estimate_pass(wide.levels, phase2_shape(plan, wide.leaves()),
                                          {tm.phase2.read_rate, tm.phase2.write_rate, sc.reset_cycles});
  tm.phase2.cycles = est2.cycles;
  tm.phase2.skewed_cycles = est2.skewed_cycles;
  tm.phase2.pass_cycles = {est2.cycles};
  tm.phase2.active_rate = est2.active_rate;

  const double bytes = static_cast<double>(plan.n) * sizeof(Record);
  for (PhaseTiming* ph : {&tm.phase1, &tm.phase2}) {
    ph->seconds = static_cast<double>(ph->cycles) / sc.clock_hz;
    ph->gbps = ph->seconds > 0 ? bytes / ph->seconds / 1e9 : 0.0;
  }
  const double total = tm.phase1.seconds + tm.phase2.seconds;
  tm.overall_gbps = total > 0 ? bytes / total / 1e9 : 0.0;
  tm.bandwidth_utilization_gbps = bandwidth_utilization(tm.phase1.gbps, plan.phase1_passes);
  return tm;
}

SortResult sort_records(std::span<const Record> input, const Config& cfg, const EngineOptions& opts) {
  SortResult res;
  res.plan = plan_sort(input.size(), cfg.sort, cfg.hbm);
  HbmStorage storage(cfg.hbm);
  load_input(res.plan, input, storage);
  res.phase1 = run_phase1(cfg, res.plan, storage, opts);
  const BatchedOutput batches = run_phase2(cfg, res.plan, storage, opts, &res.phase2);
  res.output = reconstruct_output(batches);
  for (std::size_t i = res.plan.n; i < res.output.size(); ++i) {
    if (res.output[i].key != kMaxKey) throw std::logic_error("padding did not sort to the end");
  }
  res.output.resize(res.plan.n);
  return res;
}

}  // namespace hbmsort
