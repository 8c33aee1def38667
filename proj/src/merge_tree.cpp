// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/merge_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "hbmsort/error.hpp"

namespace hbmsort {

int TreeSpec::unit_count() const {
  int n = 0;
  for (const auto& level : levels) n += static_cast<int>(level.size());
  return n;
}

namespace {

int level_comparators(const TreeLevels& levels) {
  int total = 0;
  for (const auto& level : levels) {
    for (int rate : level) total += mms_stats(rate).comparators;
  }
  return total;
}

}  // namespace

int TreeSpec::comparators() const { return level_comparators(levels); }

TreeSpec build_tree(int p, int l, int burst_bytes) {
  if (!is_valid_rate(p)) {
    throw std::invalid_argument("tree rate p must be a power of two in [1, 32], got " + std::to_string(p));
  }
  if (l < 2 || !is_power_of_two(static_cast<std::uint64_t>(l))) {
    throw std::invalid_argument("leaf count must be a power of two >= 2, got " + std::to_string(l));
  }
  if (l < p) throw std::invalid_argument("leaf count must be at least the root rate");
  if (burst_bytes < static_cast<int>(sizeof(Record)) || burst_bytes % static_cast<int>(sizeof(Record)) != 0) {
    throw std::invalid_argument("burst size must be a positive multiple of the record size");
  }
  TreeSpec t;
  t.p = p;
  t.l = l;
  const int depth = log2_exact(static_cast<std::uint64_t>(l));
  for (int d = 0; d < depth; ++d) {
    t.levels.emplace_back(std::size_t{1} << d, std::max(p >> d, 1));
  }
  t.leaf_buffer_depth = std::max(leaf_buffer_records(burst_bytes), t.levels.back().front());
  return t;
}

int WideTreeSpec::extra_comparators() const { return level_comparators(extra_levels); }

int WideTreeSpec::comparators() const { return extra_comparators() + 4 * subtrees[0]->comparators(); }

TreeSpec WideTreeSpec::flatten() const {
  TreeSpec t;
  t.p = p;
  t.l = l;
  t.levels = extra_levels;
  for (const auto& level : subtrees[0]->levels) {
    std::vector<int> joined;
    for (const auto& sub : subtrees) {
      (void)sub;
      joined.insert(joined.end(), level.begin(), level.end());
    }
    t.levels.push_back(std::move(joined));
  }
  t.leaf_buffer_depth = subtrees[0]->leaf_buffer_depth;
  return t;
}

WideTreeSpec compose_wide_tree(const std::array<std::shared_ptr<const TreeSpec>, 4>& subtrees) {
  for (const auto& s : subtrees) {
    if (!s) throw std::invalid_argument("wide tree needs four subtrees");
    if (s->p != subtrees[0]->p || s->l != subtrees[0]->l || s->levels != subtrees[0]->levels) {
      throw std::invalid_argument("wide tree subtrees must be identical");
    }
  }
  const int sub_p = subtrees[0]->p;
  if (!is_valid_rate(4 * sub_p)) throw std::invalid_argument("wide tree root rate exceeds 32");
  WideTreeSpec w;
  w.subtrees = subtrees;
  w.p = 4 * sub_p;
  w.l = 4 * subtrees[0]->l;
  w.extra_levels = {{w.p}, {w.p / 2, w.p / 2}};
  return w;
}

// ---------------------------------------------------------------------------
// Functional pass

FunctionalMerger::FunctionalMerger(TreeLevels levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("empty tree");
  for (const auto& level : levels_) {
    std::vector<MergeUnit> units;
    units.reserve(level.size());
    for (int rate : level) units.emplace_back(rate);
    units_.push_back(std::move(units));
  }
}

void FunctionalMerger::merge_group(std::span<const std::span<const Record>> leaf_runs,
                                   std::vector<Record>& out) {
  std::size_t total = 0;
  for (const auto& r : leaf_runs) total += r.size();
  const std::size_t base = out.size();
  out.resize(base + total);
  merge_group(leaf_runs, std::span<Record>(out.data() + base, total));
}

void FunctionalMerger::merge_group(std::span<const std::span<const Record>> leaf_runs, std::span<Record> out) {
  const auto n_leaves = static_cast<std::size_t>(leaves());
  if (leaf_runs.size() > n_leaves) throw std::invalid_argument("more feeds than leaves");
  cur_.assign(n_leaves, {});
  std::size_t total = 0;
  for (std::size_t i = 0; i < leaf_runs.size(); ++i) {
    cur_[i] = leaf_runs[i];
    total += leaf_runs[i].size();
  }
  if (out.size() != total) throw std::invalid_argument("output span does not match the input length");
  if (levels_.size() > 1) {
    if (buf_a_.size() < total) buf_a_.resize(total);
    if (buf_b_.size() < total) buf_b_.resize(total);
  }
  bool use_a = true;
  for (std::size_t d = levels_.size(); d-- > 0;) {
    auto& units = units_[d];
    Record* base = d == 0 ? out.data() : (use_a ? buf_a_.data() : buf_b_.data());
    next_.assign(units.size(), {});
    std::size_t offset = 0;
    for (std::size_t u = 0; u < units.size(); ++u) {
      const auto& ra = cur_[2 * u];
      const auto& rb = cur_[2 * u + 1];
      Record* w = base + offset;
      SpanPort a(ra);
      SpanPort b(rb);
      auto emit = [&w](std::span<const Slot> s) {
        for (const Slot& x : s) *w++ = x.record();
      };
      while (emits(units[u].step(a, b, emit))) {
      }
      units[u].end_run();
      const std::size_t n = ra.size() + rb.size();
      next_[u] = std::span<const Record>(base + offset, n);
      offset += n;
    }
    cur_.swap(next_);
    use_a = !use_a;
  }
}

namespace {

void check_feeds(int leaves, std::span<const LeafFeed> feeds) {
  if (feeds.size() > static_cast<std::size_t>(leaves)) {
    throw std::invalid_argument("got " + std::to_string(feeds.size()) + " feeds for " +
                                std::to_string(leaves) + " leaves");
  }
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    const auto& run = feeds[i].run;
    const auto it = std::is_sorted_until(run.begin(), run.end(), key_less);
    if (it != run.end()) {
      throw UnsortedFeedError(i, "leaf " + std::to_string(i) + " feed is not sorted at position " +
                                     std::to_string(it - run.begin()));
    }
  }
}

std::vector<Record> functional_pass(const TreeSpec& tree, std::span<const LeafFeed> feeds) {
  check_feeds(tree.leaves(), feeds);
  std::vector<std::span<const Record>> runs;
  runs.reserve(feeds.size());
  for (const auto& f : feeds) runs.emplace_back(f.run);
  FunctionalMerger merger(tree.levels);
  std::vector<Record> out;
  merger.merge_group(runs, out);
  return out;
}

}  // namespace

std::vector<Record> run_pass_functional(const TreeSpec& tree, std::span<const LeafFeed> feeds) {
  return functional_pass(tree, feeds);
}

std::vector<Record> run_pass_functional(const WideTreeSpec& tree, std::span<const LeafFeed> feeds) {
  return functional_pass(tree.flatten(), feeds);
}

// ---------------------------------------------------------------------------
// Cycle simulation

namespace {

/// Bounded FIFO of records with run-end markers.
class RunFifo {
 public:
  explicit RunFifo(std::size_t capacity) : buf_(capacity), cap_(capacity) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(pushed_ - popped_); }
  std::size_t free_space() const noexcept { return cap_ - size(); }
  bool exhausted() const noexcept { return !ends_.empty() && ends_.front() == popped_; }
  std::size_t avail_in_run() const noexcept {
    return static_cast<std::size_t>((ends_.empty() ? pushed_ : ends_.front()) - popped_);
  }
  bool decidable(std::size_t e) const noexcept {
    if (exhausted()) return true;
    const std::size_t a = avail_in_run();
    return a >= e || (a > 0 && !ends_.empty());
  }
  std::uint32_t front_key() const noexcept { return buf_[popped_ % cap_].key; }
  std::size_t take(Record* dst, std::size_t max) noexcept {
    const std::size_t n = std::min(max, avail_in_run());
    for (std::size_t i = 0; i < n; ++i) dst[i] = buf_[(popped_ + i) % cap_];
    popped_ += n;
    return n;
  }
  void push(const Record& r) noexcept {
    buf_[pushed_ % cap_] = r;
    ++pushed_;
  }
  void push_marker() { ends_.push_back(pushed_); }
  void pop_marker() { ends_.pop_front(); }

 private:
  std::vector<Record> buf_;
  std::size_t cap_;
  std::uint64_t pushed_ = 0;
  std::uint64_t popped_ = 0;
  std::deque<std::uint64_t> ends_;
};

struct SimUnit {
  MergeUnit unit;
  int reset_cycles;
  int reset_left = 0;
  bool emitted = false;
};

struct LeafSource {
  std::size_t run = 0;
  std::size_t pos = 0;
  double credit = 0.0;
  std::uint64_t trace_pending = 0;
};

class TreeSim {
 public:
  TreeSim(const TreeLevels& levels, int leaf_buffer_depth,
          const std::vector<std::vector<std::span<const Record>>>& leaf_runs,
          std::span<const std::vector<std::uint32_t>> arrivals, const TreeSimOptions& opts)
      : levels_(levels), runs_(leaf_runs), arrivals_(arrivals), opts_(opts) {
    if (opts.fifo_depth_blocks < 1) throw std::invalid_argument("FIFO depth must be at least one block");
    const std::size_t depth = levels.size();
    units_.resize(depth);
    outs_.resize(depth);
    for (std::size_t d = 0; d < depth; ++d) {
      for (std::size_t u = 0; u < levels[d].size(); ++u) {
        MergeUnit mu(levels[d][u]);
        const int reset = opts.reset_cycles < 0 ? mu.pipeline_depth() : opts.reset_cycles;
        units_[d].push_back(SimUnit{std::move(mu), reset});
        if (d > 0) {
          const auto cap = static_cast<std::size_t>(opts.fifo_depth_blocks) *
                           static_cast<std::size_t>(levels[d - 1][u / 2]);
          outs_[d].emplace_back(cap);
        }
      }
    }
    const std::size_t n_leaves = 2 * levels.back().size();
    if (runs_.size() != n_leaves) throw std::invalid_argument("leaf run table does not match the tree");
    groups_ = runs_.empty() ? 0 : runs_[0].size();
    for (const auto& r : runs_) {
      if (r.size() != groups_) throw std::invalid_argument("every leaf needs one run per group");
    }
    const int lbd = opts.leaf_buffer_depth > 0 ? opts.leaf_buffer_depth : leaf_buffer_depth;
    if (lbd < levels.back().front()) throw std::invalid_argument("leaf buffer smaller than one block");
    for (std::size_t i = 0; i < n_leaves; ++i) leaves_.emplace_back(static_cast<std::size_t>(lbd));
    sources_.resize(n_leaves);
    if (opts.channel_feed) {
      const auto& cf = *opts.channel_feed;
      if (cf.leaf_channel.size() != n_leaves) throw std::invalid_argument("channel feed map size mismatch");
      if (cf.burst_records < 1 || cf.channel_rate <= 0) throw std::invalid_argument("bad channel feed");
      int max_ch = 0;
      for (int c : cf.leaf_channel) max_ch = std::max(max_ch, c);
      channels_.resize(static_cast<std::size_t>(max_ch) + 1);
    }
  }

  CycleResult run() {
    CycleResult res;
    for (const auto& leaf : runs_) {
      for (const auto& r : leaf) total_ += r.size();
    }
    res.output.reserve(total_);
    out_ = &res.output;
    feed_leaves(0);
    std::uint64_t cycle = 0;
    while (root_runs_done_ < groups_) {
      if (cycle >= opts_.max_cycles) throw std::runtime_error("cycle simulation did not converge");
      if (std::isfinite(opts_.sink_rate)) {
        sink_credit_ = std::min(sink_credit_ + opts_.sink_rate, 2.0 * levels_[0][0] + opts_.sink_rate);
      }
      for (std::size_t d = 0; d < levels_.size(); ++d) {
        for (std::size_t u = 0; u < units_[d].size(); ++u) step_unit(d, u);
      }
      ++cycle;
      feed_leaves(cycle);
    }
    res.fill_latency = fill_latency(levels_);
    res.cycles = cycle + res.fill_latency;
    res.root_stall_cycles = root_stalls_;
    res.root_active_rate = res.cycles == 0 ? 0.0 : static_cast<double>(res.output.size()) / static_cast<double>(res.cycles);
    return res;
  }

 private:
  RunFifo& input(std::size_t d, std::size_t u, std::size_t port) {
    if (d + 1 == levels_.size()) return leaves_[2 * u + port];
    return outs_[d + 1][2 * u + port];
  }

  void finish_run(std::size_t d, std::size_t u, RunFifo& a, RunFifo& b) {
    SimUnit& s = units_[d][u];
    a.pop_marker();
    b.pop_marker();
    s.unit.end_run();
    if (d == 0) {
      ++root_runs_done_;
    } else {
      outs_[d][u].push_marker();
    }
    if (s.emitted) s.reset_left = s.reset_cycles;
    s.emitted = false;
  }

  void step_unit(std::size_t d, std::size_t u) {
    SimUnit& s = units_[d][u];
    if (s.reset_left > 0) {
      --s.reset_left;
      if (d == 0) ++root_stalls_;
      return;
    }
    RunFifo& a = input(d, u, 0);
    RunFifo& b = input(d, u, 1);
    while (!s.unit.has_retained() && a.exhausted() && b.exhausted()) {
      finish_run(d, u, a, b);
      if (s.reset_left > 0 || (d == 0 && root_runs_done_ == groups_)) return;
    }
    const auto e = static_cast<std::size_t>(s.unit.rate());
    if (!a.decidable(e) || !b.decidable(e)) {
      if (d == 0) ++root_stalls_;
      return;
    }
    if (d == 0) {
      if (std::isfinite(opts_.sink_rate) && sink_credit_ < static_cast<double>(e)) {
        ++root_stalls_;
        return;
      }
      s.unit.step(a, b, [this](std::span<const Slot> blk) {
        for (const Slot& x : blk) out_->push_back(x.record());
        if (std::isfinite(opts_.sink_rate)) sink_credit_ -= static_cast<double>(blk.size());
      });
    } else {
      RunFifo& out = outs_[d][u];
      if (out.free_space() < e) return;
      s.unit.step(a, b, [&out](std::span<const Slot> blk) {
        for (const Slot& x : blk) out.push(x.record());
      });
    }
    s.emitted = true;
    if (!s.unit.has_retained() && a.exhausted() && b.exhausted()) finish_run(d, u, a, b);
  }

  /// Pushes markers for runs that are fully delivered. Returns false when the
  /// leaf has nothing left to deliver.
  bool settle(std::size_t leaf) {
    LeafSource& src = sources_[leaf];
    const auto& runs = runs_[leaf];
    while (src.run < groups_ && src.pos == runs[src.run].size()) {
      leaves_[leaf].push_marker();
      ++src.run;
      src.pos = 0;
    }
    return src.run < groups_;
  }

  std::size_t deliver(std::size_t leaf, std::size_t max) {
    LeafSource& src = sources_[leaf];
    RunFifo& fifo = leaves_[leaf];
    std::size_t moved = 0;
    while (moved < max && settle(leaf)) {
      const auto& run = runs_[leaf][src.run];
      const std::size_t n = std::min({max - moved, fifo.free_space(), run.size() - src.pos});
      if (n == 0) break;
      for (std::size_t i = 0; i < n; ++i) fifo.push(run[src.pos + i]);
      src.pos += n;
      moved += n;
    }
    settle(leaf);
    return moved;
  }

  std::size_t remaining_in_run(std::size_t leaf) {
    const LeafSource& src = sources_[leaf];
    if (src.run >= groups_) return 0;
    return runs_[leaf][src.run].size() - src.pos;
  }

  void feed_leaves(std::uint64_t cycle) {
    if (opts_.channel_feed) {
      feed_channels();
      return;
    }
    const double rate = opts_.feed_rate_per_leaf;
    for (std::size_t leaf = 0; leaf < leaves_.size(); ++leaf) {
      if (!settle(leaf)) continue;
      LeafSource& src = sources_[leaf];
      const std::vector<std::uint32_t>* trace =
          leaf < arrivals_.size() && !arrivals_[leaf].empty() ? &arrivals_[leaf] : nullptr;
      if (trace != nullptr && cycle < trace->size()) {
        src.trace_pending += (*trace)[cycle];
        src.trace_pending -= deliver(leaf, static_cast<std::size_t>(src.trace_pending));
      } else if (!std::isfinite(rate)) {
        deliver(leaf, std::numeric_limits<std::size_t>::max());
      } else {
        src.credit = std::min(src.credit + rate, std::max(rate, 1.0));
        const auto want = static_cast<std::size_t>(src.trace_pending + static_cast<std::uint64_t>(src.credit));
        const std::size_t got = deliver(leaf, want);
        const std::size_t from_pending = std::min<std::uint64_t>(got, src.trace_pending);
        src.trace_pending -= from_pending;
        src.credit -= static_cast<double>(got - from_pending);
      }
    }
  }

  struct ChannelState {
    double credit = 0.0;
    long current = -1;
    std::size_t burst_left = 0;
    std::size_t next = 0;
  };

  void feed_channels() {
    const ChannelFeed& cf = *opts_.channel_feed;
    const auto burst = static_cast<std::size_t>(cf.burst_records);
    for (std::size_t leaf = 0; leaf < leaves_.size(); ++leaf) settle(leaf);
    for (std::size_t ch = 0; ch < channels_.size(); ++ch) {
      ChannelState& st = channels_[ch];
      st.credit = std::min(st.credit + cf.channel_rate, cf.channel_rate + static_cast<double>(burst));
      while (true) {
        if (st.burst_left == 0) {
          st.current = -1;
          for (std::size_t k = 0; k < leaves_.size(); ++k) {
            const std::size_t leaf = (st.next + k) % leaves_.size();
            if (cf.leaf_channel[leaf] != static_cast<int>(ch)) continue;
            const std::size_t rem = remaining_in_run(leaf);
            if (rem == 0) continue;
            const std::size_t want = std::min(burst, rem);
            if (leaves_[leaf].free_space() < want) continue;
            st.current = static_cast<long>(leaf);
            st.burst_left = want;
            st.next = leaf + 1;
            break;
          }
          if (st.current < 0) break;
        }
        const auto n = std::min(st.burst_left, static_cast<std::size_t>(st.credit));
        if (n == 0) break;
        const std::size_t got = deliver(static_cast<std::size_t>(st.current), n);
        st.burst_left -= got;
        st.credit -= static_cast<double>(got);
        if (got < n) st.burst_left = 0;
      }
    }
  }

  const TreeLevels& levels_;
  const std::vector<std::vector<std::span<const Record>>>& runs_;
  std::span<const std::vector<std::uint32_t>> arrivals_;
  const TreeSimOptions& opts_;
  std::vector<std::vector<SimUnit>> units_;
  std::vector<std::vector<RunFifo>> outs_;
  std::vector<RunFifo> leaves_;
  std::vector<LeafSource> sources_;
  std::vector<ChannelState> channels_;
  std::size_t groups_ = 0;
  std::size_t root_runs_done_ = 0;
  std::uint64_t root_stalls_ = 0;
  std::size_t total_ = 0;
  double sink_credit_ = 0.0;
  std::vector<Record>* out_ = nullptr;
};

CycleResult cycle_pass(const TreeSpec& tree, std::span<const LeafFeed> feeds, const TreeSimOptions& opts) {
  check_feeds(tree.leaves(), feeds);
  std::vector<std::vector<std::span<const Record>>> runs(static_cast<std::size_t>(tree.leaves()),
                                                         std::vector<std::span<const Record>>(1));
  std::vector<std::vector<std::uint32_t>> arrivals(runs.size());
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    runs[i][0] = feeds[i].run;
    arrivals[i] = feeds[i].arrivals;
  }
  TreeSim sim(tree.levels, tree.leaf_buffer_depth, runs, arrivals, opts);
  return sim.run();
}

}  // namespace

std::uint64_t fill_latency(const TreeLevels& levels) {
  std::uint64_t total = 0;
  for (const auto& level : levels) total += static_cast<std::uint64_t>(mms_stats(level.front()).stages);
  return total;
}

CycleResult simulate_groups(const TreeLevels& levels, int leaf_buffer_depth,
                            const std::vector<std::vector<std::span<const Record>>>& leaf_runs,
                            std::span<const std::vector<std::uint32_t>> arrivals,
                            const TreeSimOptions& opts) {
  TreeSim sim(levels, leaf_buffer_depth, leaf_runs, arrivals, opts);
  return sim.run();
}

CycleResult run_pass_cycles(const TreeSpec& tree, std::span<const LeafFeed> feeds, const TreeSimOptions& opts) {
  return cycle_pass(tree, feeds, opts);
}

CycleResult run_pass_cycles(const WideTreeSpec& tree, std::span<const LeafFeed> feeds,
                            const TreeSimOptions& opts) {
  return cycle_pass(tree.flatten(), feeds, opts);
}

// ---------------------------------------------------------------------------
// Trace timing model

double active_rate_bound(const TreeLevels& levels, const std::vector<bool>& active_leaf) {
  const std::size_t bottom = levels.size() - 1;
  if (active_leaf.size() != 2 * levels[bottom].size()) throw std::invalid_argument("leaf mask size mismatch");
  std::vector<double> supply(active_leaf.size());
  for (std::size_t i = 0; i < supply.size(); ++i) {
    supply[i] = active_leaf[i] ? static_cast<double>(levels[bottom][i / 2]) : 0.0;
  }
  for (std::size_t d = levels.size(); d-- > 0;) {
    std::vector<double> next(levels[d].size());
    for (std::size_t u = 0; u < next.size(); ++u) {
      next[u] = std::min(static_cast<double>(levels[d][u]), supply[2 * u] + supply[2 * u + 1]);
    }
    supply.swap(next);
  }
  return supply[0];
}

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint64_t ceil_cycles(double records, double rate) {
  if (!std::isfinite(rate)) return 0;
  return static_cast<std::uint64_t>(std::ceil(records / rate - 1e-9));
}

}  // namespace

PassEstimate estimate_pass(const TreeLevels& levels, const PassShape& shape, const PassTimingParams& params) {
  const std::size_t n_leaves = 2 * levels.back().size();
  if (!shape.leaf_class.empty() && shape.leaf_class.size() != n_leaves) {
    throw std::invalid_argument("leaf class table size mismatch");
  }
  PassEstimate est;
  double weighted_rate = 0.0;
  std::uint64_t weight = 0;
  for (const GroupShape& g : shape.groups) {
    if (g.leaf_len.size() != n_leaves) throw std::invalid_argument("group shape size mismatch");
    std::vector<std::uint64_t> totals = g.leaf_len;
    std::uint64_t unit_bound = 0;
    for (std::size_t d = levels.size(); d-- > 0;) {
      std::vector<std::uint64_t> next(levels[d].size());
      for (std::size_t u = 0; u < next.size(); ++u) {
        const auto e = static_cast<std::uint64_t>(levels[d][u]);
        const std::uint64_t nl = totals[2 * u];
        const std::uint64_t nr = totals[2 * u + 1];
        std::uint64_t t = ceil_div(nl, e) + ceil_div(nr, e);
        if (nl + nr > 0) {
          t += static_cast<std::uint64_t>(params.reset_cycles < 0 ? mms_stats(levels[d][u]).stages
                                                                  : params.reset_cycles);
        }
        unit_bound = std::max(unit_bound, t);
        next[u] = nl + nr;
      }
      totals.swap(next);
    }
    const std::uint64_t n = totals[0];
    if (n == 0) continue;

    std::vector<bool> active(n_leaves, false);
    std::vector<bool> class_seen(n_leaves, false);
    std::size_t first = n_leaves;
    for (std::size_t i = 0; i < n_leaves; ++i) {
      if (g.leaf_len[i] == 0) continue;
      if (first == n_leaves) first = i;
      const int cls = shape.leaf_class.empty() ? -1 : shape.leaf_class[i];
      if (cls < 0) {
        active[i] = true;
      } else if (!class_seen[static_cast<std::size_t>(cls)]) {
        class_seen[static_cast<std::size_t>(cls)] = true;
        active[i] = true;
      }
    }
    const double rate = active_rate_bound(levels, active);
    std::vector<bool> single(n_leaves, false);
    single[first] = true;
    const double skew_rate = active_rate_bound(levels, single);

    const auto nd = static_cast<double>(n);
    const std::uint64_t mem = std::max(ceil_cycles(nd, params.read_rate), ceil_cycles(nd, params.write_rate));
    const std::uint64_t t = std::max({unit_bound, ceil_cycles(nd, rate), mem});
    const std::uint64_t t_skew = std::max({unit_bound, ceil_cycles(nd, skew_rate), mem});
    est.cycles += g.repeat * t;
    est.skewed_cycles += g.repeat * t_skew;
    weighted_rate += rate * static_cast<double>(g.repeat * n);
    weight += g.repeat * n;
  }
  const std::uint64_t fill = fill_latency(levels);
  est.cycles += fill;
  est.skewed_cycles += fill;
  est.active_rate = weight == 0 ? 0.0 : weighted_rate / static_cast<double>(weight);
  return est;
}

}  // namespace hbmsort
