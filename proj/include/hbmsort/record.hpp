// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace hbmsort {

/// A sort element. Ordering uses the key only; the value is an opaque payload.
struct Record {
  std::uint32_t key = 0;
  std::uint32_t value = 0;

  friend bool operator==(const Record&, const Record&) = default;
};

static_assert(sizeof(Record) == 8, "records are serialized as 8 bytes");

inline constexpr std::uint32_t kMaxKey = std::numeric_limits<std::uint32_t>::max();

inline constexpr bool key_less(const Record& a, const Record& b) noexcept {
  return a.key < b.key;
}

}  // namespace hbmsort
