// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/merge_net.hpp"

#include <algorithm>
#include <string>

namespace hbmsort {

void require_valid_rate(int rate) {
  if (!is_valid_rate(rate)) {
    throw std::invalid_argument("merge rate must be a power of two in [1, 32], got " +
                                std::to_string(rate));
  }
}

namespace {

std::vector<Comparator> build_cells(int rate) {
  std::vector<Comparator> cells;
  const int n = 2 * rate;
  int stage = 0;
  for (int half = rate; half >= 1; half >>= 1, ++stage) {
    for (int i = 0; i < n; ++i) {
      if ((i & half) == 0) cells.push_back({stage, i, i + half});
    }
  }
  return cells;
}
}  // namespace

const std::vector<Comparator>& bitonic_merger_cells(int rate) {
  require_valid_rate(rate);
  static const std::array<std::vector<Comparator>, 6> tables = [] {
    std::array<std::vector<Comparator>, 6> t;
    for (int i = 0; i < 6; ++i) t[i] = build_cells(1 << i);
    return t;
  }();
  return tables[log2_exact(static_cast<std::uint64_t>(rate))];
}

ComparatorStats merger_stats(int rate) {
  require_valid_rate(rate);
  const int stages = log2_exact(static_cast<std::uint64_t>(2 * rate));
  return {rate * stages, stages};
}

ComparatorStats mms_stats(int rate) {
  require_valid_rate(rate);
  if (rate == 1) return {1, 1};
  const ComparatorStats one = merger_stats(rate);
  return {2 * one.comparators, 2 * one.stages};
}

void merge_halves(std::span<Slot> v, int rate) {
  const auto& cells = bitonic_merger_cells(rate);
  apply_merger(v.data(), static_cast<std::size_t>(rate), cells.data(), cells.size());
}

MergeUnit::MergeUnit(int rate)
    : rate_(rate),
      pipeline_depth_(mms_stats(rate).stages),
      cells_(bitonic_merger_cells(rate).data()),
      n_cells_(bitonic_merger_cells(rate).size()) {}

void MergeUnit::end_run() {
  if (has_retained_) throw std::logic_error("end_run with a non-empty retained block");
  seq_ = {0, 0};
  ++run_epoch_;
}

namespace {

void check_block(std::span<const Record> blk, std::size_t rate, const char* name) {
  if (blk.empty() || blk.size() > rate) {
    throw std::invalid_argument(std::string(name) + " block must hold 1.." + std::to_string(rate) +
                                " records");
  }
  if (!std::is_sorted(blk.begin(), blk.end(), key_less)) {
    throw std::invalid_argument(std::string(name) + " block is not sorted");
  }
}

}  // namespace

std::vector<Record> bitonic_merge_blocks(std::span<const Record> a, std::span<const Record> b) {
  if (a.size() != b.size()) throw std::invalid_argument("blocks of mismatched rate");
  const int rate = static_cast<int>(a.size());
  require_valid_rate(rate);
  check_block(a, a.size(), "A");
  check_block(b, b.size(), "B");
  std::array<Slot, 2 * kMaxRate> v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[i] = make_slot(a[i], 0, i);
    v[a.size() + i] = make_slot(b[i], 1, i);
  }
  merge_halves(std::span<Slot>(v.data(), 2 * a.size()), rate);
  std::vector<Record> out(2 * a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i].record();
  return out;
}

MmsOutput mms_step(MergeUnit& state, std::optional<std::span<const Record>> head_a,
                   std::optional<std::span<const Record>> head_b) {
  const auto e = static_cast<std::size_t>(state.rate());
  if (head_a) check_block(*head_a, e, "A");
  if (head_b) check_block(*head_b, e, "B");
  if (!head_a && !head_b && !state.has_retained()) {
    throw std::logic_error("mms_step on a drained unit");
  }
  SpanPort pa(head_a.value_or(std::span<const Record>{}));
  SpanPort pb(head_b.value_or(std::span<const Record>{}));
  MmsOutput res;
  const StepKind kind = state.step(pa, pb, [&](std::span<const Slot> s) {
    res.out.reserve(s.size());
    for (const Slot& x : s) res.out.push_back(x.record());
  });
  switch (kind) {
    case StepKind::passthrough_a:
    case StepKind::take_a:
      res.consumed = Consumed::a;
      break;
    case StepKind::passthrough_b:
    case StepKind::take_b:
      res.consumed = Consumed::b;
      break;
    case StepKind::prime:
      res.consumed = Consumed::both;
      break;
    case StepKind::flush:
      res.consumed = Consumed::flush;
      break;
    case StepKind::idle:
      throw std::logic_error("mms_step on a drained unit");
  }
  return res;
}

RunMerge merge_runs(int rate, std::span<const Record> a, std::span<const Record> b) {
  MergeUnit unit(rate);
  SpanPort pa(a);
  SpanPort pb(b);
  RunMerge res;
  res.out.reserve(a.size() + b.size());
  auto sink = [&](std::span<const Slot> s) {
    for (const Slot& x : s) res.out.push_back(x.record());
  };
  while (emits(unit.step(pa, pb, sink))) ++res.steps;
  unit.end_run();
  return res;
}

}  // namespace hbmsort
