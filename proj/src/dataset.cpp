// SPDX-License-Identifier: Apache-2.0
#include "hbmsort/dataset.hpp"

#include <array>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "hbmsort/error.hpp"

namespace hbmsort {

namespace {

constexpr std::size_t kChunkRecords = 1 << 16;

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

Distribution parse_distribution(const std::string& name) {
  if (name == "permutation") return Distribution::permutation;
  if (name == "uniform") return Distribution::uniform;
  throw std::invalid_argument("unknown distribution '" + name + "' (permutation or uniform)");
}

std::string to_string(Distribution d) { return d == Distribution::permutation ? "permutation" : "uniform"; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

std::vector<Record> generate_dataset(const DatasetSpec& spec) {
  if (spec.n > kMaxKey) throw std::invalid_argument("dataset size exceeds the 32-bit key range");
  std::mt19937_64 rng(spec.seed);
  std::vector<Record> out(spec.n);
  if (spec.distribution == Distribution::permutation) {
    for (std::uint64_t i = 0; i < spec.n; ++i) {
      const auto k = static_cast<std::uint32_t>(i + 1);
      out[i] = {k, k};
    }
    for (std::uint64_t i = spec.n; i > 1; --i) std::swap(out[i - 1], out[uniform_below(rng, i)]);
  } else {
    for (std::uint64_t i = 0; i < spec.n; ++i) {
      out[i] = {static_cast<std::uint32_t>(uniform_below(rng, spec.n) + 1), static_cast<std::uint32_t>(i)};
    }
  }
  return out;
}

std::vector<Record> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  if (size % sizeof(Record) != 0) {
    throw IoError(path.string() + ": size " + std::to_string(size) + " is not a multiple of 8 bytes");
  }
  std::vector<Record> out(size / sizeof(Record));
  std::vector<unsigned char> buf(kChunkRecords * sizeof(Record));
  for (std::size_t pos = 0; pos < out.size(); pos += kChunkRecords) {
    const std::size_t count = std::min(kChunkRecords, out.size() - pos);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(Record)))) {
      throw IoError(path.string() + ": short read");
    }
    for (std::size_t i = 0; i < count; ++i) out[pos + i] = {get_u32(&buf[8 * i]), get_u32(&buf[8 * i + 4])};
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  std::vector<unsigned char> buf(kChunkRecords * sizeof(Record));
  for (std::size_t pos = 0; pos < records.size(); pos += kChunkRecords) {
    const std::size_t count = std::min(kChunkRecords, records.size() - pos);
    for (std::size_t i = 0; i < count; ++i) {
      put_u32(&buf[8 * i], records[pos + i].key);
      put_u32(&buf[8 * i + 4], records[pos + i].value);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count * sizeof(Record)));
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace hbmsort
