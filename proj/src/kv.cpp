// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/kv.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hbmsort/error.hpp"

namespace hbmsort {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void kv_fail(const KvEntry& e, const std::string& origin, const std::string& message) {
  throw ConfigError(origin + ":" + std::to_string(e.line) + ": " + message);
}

std::vector<KvEntry> parse_kv(const std::string& text, const std::string& origin) {
  std::vector<KvEntry> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    KvEntry e{{}, {}, line};
    if (eq == std::string::npos) kv_fail(e, origin, "expected 'key = value'");
    e.key = trim(body.substr(0, eq));
    e.value = trim(body.substr(eq + 1));
    if (e.key.empty()) kv_fail(e, origin, "empty key");
    if (e.value.empty()) kv_fail(e, origin, "empty value for '" + e.key + "'");
    if (!seen.insert(e.key).second) kv_fail(e, origin, "duplicate key '" + e.key + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double kv_double(const KvEntry& e, const std::string& origin) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (used == e.value.size()) return v;
  } catch (const std::exception&) {
  }
  kv_fail(e, origin, "'" + e.key + "' expects a number, got '" + e.value + "'");
}

std::int64_t kv_int(const KvEntry& e, const std::string& origin) {
  std::int64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    kv_fail(e, origin, "'" + e.key + "' expects an integer, got '" + e.value + "'");
  }
  return v;
}

bool kv_bool(const KvEntry& e, const std::string& origin) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  kv_fail(e, origin, "'" + e.key + "' expects true or false, got '" + e.value + "'");
}

}  // namespace hbmsort
