// SPDX-License-Identifier: Apache-2.0
//
// Line-oriented `key = value` files with `#` comments.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hbmsort {

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses the text; duplicate keys and malformed lines throw ConfigError.
std::vector<KvEntry> parse_kv(const std::string& text, const std::string& origin);
std::string read_text_file(const std::filesystem::path& path);

double kv_double(const KvEntry& e, const std::string& origin);
std::int64_t kv_int(const KvEntry& e, const std::string& origin);
bool kv_bool(const KvEntry& e, const std::string& origin);

/// "origin:line: message"
[[noreturn]] void kv_fail(const KvEntry& e, const std::string& origin, const std::string& message);

}  // namespace hbmsort
