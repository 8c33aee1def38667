// SPDX-License-Identifier: Apache-2.0
//
// Streaming merge primitives: compare-swap cells, E-rate bitonic mergers and
// the MMS merge unit that emits one E-record block per invocation.
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hbmsort/record.hpp"

namespace hbmsort {

inline constexpr int kMaxRate = 32;

constexpr bool is_power_of_two(std::uint64_t v) noexcept { return v != 0 && (v & (v - 1)) == 0; }

constexpr int log2_exact(std::uint64_t v) noexcept {
  int r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

/// Valid block rates are the powers of two 1..32.
constexpr bool is_valid_rate(int rate) noexcept {
  return rate >= 1 && rate <= kMaxRate && is_power_of_two(static_cast<std::uint64_t>(rate));
}

void require_valid_rate(int rate);

/// (min, max) by key; on equal keys the inputs keep their order.
constexpr std::pair<Record, Record> compare_swap(const Record& a, const Record& b) noexcept {
  if (b.key < a.key) return {b, a};
  return {a, b};
}

// ---------------------------------------------------------------------------
// Network structure

/// One compare-swap cell: after it fires, slot `lo` holds the smaller element.
struct Comparator {
  int stage;
  int lo;
  int hi;
};

/// Cells of the bitonic merger for two sorted E-blocks (2E inputs). The second
/// block is wired in reverse so the concatenation is bitonic.
const std::vector<Comparator>& bitonic_merger_cells(int rate);

struct ComparatorStats {
  int comparators = 0;
  int stages = 0;

  friend bool operator==(const ComparatorStats&, const ComparatorStats&) = default;
};

/// Closed-form cost of a single bitonic merger over 2E elements.
ComparatorStats merger_stats(int rate);

/// Closed-form cost of an MMS unit (two mergers). The E=1 unit is a single
/// compare-swap cell.
ComparatorStats mms_stats(int rate);

// ---------------------------------------------------------------------------
// Tagged lanes

/// A record travelling through a merge unit. The rank packs the key with a
/// padding flag, the input port and the position inside the current run, so
/// every rank is unique and ordering by rank is the stable merge order.
struct Slot {
  std::uint64_t rank = 0;
  std::uint32_t value = 0;

  std::uint32_t key() const noexcept { return static_cast<std::uint32_t>(rank >> 32); }
  bool is_pad() const noexcept { return (rank >> 31) & 1U; }
  Record record() const noexcept { return Record{key(), value}; }
};

inline constexpr std::uint64_t kPadBit = std::uint64_t{1} << 31;
inline constexpr std::uint64_t kPortBit = std::uint64_t{1} << 30;
inline constexpr std::uint64_t kMaxRunSeq = (std::uint64_t{1} << 30) - 1;

inline Slot make_slot(const Record& r, unsigned port, std::uint64_t seq) noexcept {
  return Slot{(std::uint64_t{r.key} << 32) | (port ? kPortBit : 0) | seq, r.value};
}

inline Slot make_pad(unsigned port, std::uint64_t seq) noexcept {
  return Slot{(std::uint64_t{kMaxKey} << 32) | kPadBit | (port ? kPortBit : 0) | seq, 0};
}

/// Merges two ascending halves v[0,E) and v[E,2E) in place with the merger
/// network for `rate`.
void merge_halves(std::span<Slot> v, int rate);

/// merge_halves with the network already looked up.
inline void apply_merger(Slot* v, std::size_t rate, const Comparator* cells, std::size_t n_cells) noexcept {
  std::reverse(v + rate, v + 2 * rate);
  for (std::size_t i = 0; i < n_cells; ++i) {
    Slot& x = v[cells[i].lo];
    Slot& y = v[cells[i].hi];
    const Slot a = x;
    const Slot b = y;
    const bool s = b.rank < a.rank;
    x = s ? b : a;
    y = s ? a : b;
  }
}

// ---------------------------------------------------------------------------
// MMS merge unit

enum class StepKind {
  idle,             ///< both inputs exhausted and nothing retained
  passthrough_a,    ///< B exhausted, nothing retained: A's head forwarded
  passthrough_b,
  prime,            ///< first step of a run pair: one block from each side
  take_a,
  take_b,
  flush,            ///< both inputs exhausted: retained block emitted
};

inline bool emits(StepKind k) noexcept { return k != StepKind::idle; }

/// Input port contract used by MergeUnit::step:
///   bool exhausted() const;                    current run has no more records
///   std::uint32_t front_key() const;           key of the next record
///   std::size_t take(Record* dst, size_t max); pops up to `max` records of the
///                                              current run, returns count > 0
template <class P>
concept MergePort = requires(P& p, const P& cp, Record* dst, std::size_t n) {
  { cp.exhausted() } -> std::convertible_to<bool>;
  { cp.front_key() } -> std::convertible_to<std::uint32_t>;
  { p.take(dst, n) } -> std::convertible_to<std::size_t>;
};

/// E-rate streaming merge unit. Keeps the upper half of the last merge as the
/// retained block and emits exactly one block per step.
class MergeUnit {
 public:
  explicit MergeUnit(int rate);

  int rate() const noexcept { return rate_; }
  int pipeline_depth() const noexcept { return pipeline_depth_; }
  bool has_retained() const noexcept { return has_retained_; }
  std::uint64_t run_epoch() const noexcept { return run_epoch_; }
  std::span<const Slot> retained() const noexcept {
    return has_retained_ ? std::span<const Slot>(work_.data() + rate_, rate_) : std::span<const Slot>{};
  }

  /// Performs one step. `emit` receives the non-padding slots of the emitted
  /// block (possibly empty when the block was all padding).
  template <MergePort PA, MergePort PB, class Emit>
  StepKind step(PA& a, PB& b, Emit&& emit) {
    const bool a_done = a.exhausted();
    const bool b_done = b.exhausted();
    const std::size_t e = static_cast<std::size_t>(rate_);
    if (!has_retained_) {
      if (a_done && b_done) return StepKind::idle;
      if (b_done || a_done) {
        const unsigned port = a_done ? 1U : 0U;
        if (port == 0) {
          load(a, 0, work_.data());
        } else {
          load(b, 1, work_.data());
        }
        emit_block(work_.data(), emit);
        return port == 0 ? StepKind::passthrough_a : StepKind::passthrough_b;
      }
      load(a, 0, work_.data());
      load(b, 1, work_.data() + e);
      apply_merger(work_.data(), e, cells_, n_cells_);
      emit_block(work_.data(), emit);
      keep_upper();
      return StepKind::prime;
    }
    if (a_done && b_done) {
      emit_block(work_.data() + e, emit);
      has_retained_ = false;
      return StepKind::flush;
    }
    const bool take_a = b_done || (!a_done && a.front_key() <= b.front_key());
    // The retained block already sits in the upper half; ranks are unique,
    // so the merged order does not depend on which half holds which input.
    if (take_a) {
      load(a, 0, work_.data());
    } else {
      load(b, 1, work_.data());
    }
    apply_merger(work_.data(), e, cells_, n_cells_);
    emit_block(work_.data(), emit);
    keep_upper();
    return take_a ? StepKind::take_a : StepKind::take_b;
  }

  /// Marks the boundary between run pairs. Requires an empty retained block.
  void end_run();

 private:
  template <class P>
  void load(P& port, unsigned which, Slot* dst) {
    const std::size_t e = static_cast<std::size_t>(rate_);
    std::uint64_t& seq = seq_[which];
    if (seq + e > kMaxRunSeq) throw std::length_error("run too long for a merge unit");
    const std::uint64_t tag = (which ? kPortBit : 0) | seq;
    std::size_t got = 0;
    if constexpr (requires { port.peek(e); }) {
      const std::span<const Record> blk = port.peek(e);
      got = blk.size();
      for (std::size_t i = 0; i < got; ++i) dst[i] = Slot{(std::uint64_t{blk[i].key} << 32) | (tag + i), blk[i].value};
      port.skip(got);
    } else {
      std::array<Record, kMaxRate> buf;
      while (got < e && !port.exhausted()) got += port.take(buf.data() + got, e - got);
      for (std::size_t i = 0; i < got; ++i) dst[i] = Slot{(std::uint64_t{buf[i].key} << 32) | (tag + i), buf[i].value};
    }
    for (std::size_t i = got; i < e; ++i) dst[i] = Slot{(std::uint64_t{kMaxKey} << 32) | kPadBit | (tag + i), 0};
    seq += e;
  }

  template <class Emit>
  void emit_block(const Slot* block, Emit& emit) {
    std::size_t real = static_cast<std::size_t>(rate_);
    while (real > 0 && block[real - 1].is_pad()) --real;
    emit(std::span<const Slot>(block, real));
  }

  void keep_upper() { has_retained_ = true; }

  int rate_;
  int pipeline_depth_;
  const Comparator* cells_;
  std::size_t n_cells_;
  bool has_retained_ = false;
  std::uint64_t run_epoch_ = 0;
  std::array<std::uint64_t, 2> seq_{};
  std::array<Slot, 2 * kMaxRate> work_{};
};

/// Port over one in-memory sorted run.
class SpanPort {
 public:
  SpanPort() = default;
  explicit SpanPort(std::span<const Record> run) : run_(run) {}

  bool exhausted() const noexcept { return pos_ == run_.size(); }
  std::uint32_t front_key() const noexcept { return run_[pos_].key; }
  /// Contiguous fast path: the next up to `max` records without consuming.
  std::span<const Record> peek(std::size_t max) const noexcept {
    return run_.subspan(pos_, std::min(max, run_.size() - pos_));
  }
  void skip(std::size_t n) noexcept { pos_ += n; }
  std::size_t take(Record* dst, std::size_t max) noexcept {
    const std::size_t n = std::min(max, run_.size() - pos_);
    std::copy_n(run_.data() + pos_, n, dst);
    pos_ += n;
    return n;
  }

 private:
  std::span<const Record> run_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Record-level operations

/// Merges two sorted E-blocks through the merger network. Equal keys keep
/// A-before-B order.
std::vector<Record> bitonic_merge_blocks(std::span<const Record> a, std::span<const Record> b);

enum class Consumed { a, b, both, flush };

struct MmsOutput {
  std::vector<Record> out;
  Consumed consumed;
};

/// One MMS step on explicit head blocks; std::nullopt marks an exhausted
/// input. Heads must be full E-blocks except for the last block of a run.
MmsOutput mms_step(MergeUnit& state, std::optional<std::span<const Record>> head_a,
                   std::optional<std::span<const Record>> head_b);

/// Merges two whole sorted runs with a unit of the given rate; returns the
/// concatenated emissions and the number of steps taken.
struct RunMerge {
  std::vector<Record> out;
  std::size_t steps = 0;
};
RunMerge merge_runs(int rate, std::span<const Record> a, std::span<const Record> b);

}  // namespace hbmsort
