// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hbmsort {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File access or dataset format problems; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a leaf feed is not sorted; carries the offending leaf.
class UnsortedFeedError : public std::runtime_error {
 public:
  UnsortedFeedError(std::size_t leaf, const std::string& what)
      : std::runtime_error(what), leaf_(leaf) {}
  std::size_t leaf() const noexcept { return leaf_; }

 private:
  std::size_t leaf_;
};

/// Thrown when batched output is missing data; carries the batch index.
class IntegrityError : public std::runtime_error {
 public:
  IntegrityError(std::size_t batch, const std::string& what)
      : std::runtime_error(what), batch_(batch) {}
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t batch_;
};

}  // namespace hbmsort
