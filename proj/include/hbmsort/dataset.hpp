// SPDX-License-Identifier: Apache-2.0
//
// Benchmark datasets: raw little-endian 8-byte records, no header.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hbmsort/record.hpp"

namespace hbmsort {

enum class Distribution { permutation, uniform };

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution d);

struct DatasetSpec {
  std::uint64_t n = 0;
  Distribution distribution = Distribution::permutation;
  std::uint64_t seed = 0;
};

/// Uniform integer in [0, bound) by rejection, so streams match across
/// standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// permutation: keys 1..n shuffled (Fisher-Yates), value = key.
/// uniform: keys drawn from 1..n with repeats, value = position.
std::vector<Record> generate_dataset(const DatasetSpec& spec);

std::vector<Record> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<Record>& records);

}  // namespace hbmsort
