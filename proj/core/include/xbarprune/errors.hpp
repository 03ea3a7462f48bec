// Copyright 2026 The xbarprune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xbarprune {

/// Malformed argument: bad shape, out-of-range parameter, missing
/// precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The model or mask leaves nothing to work with (zero fan, no kept
/// weights, no live output channel).
class DegenerateModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loss or gradient became NaN/Inf during training.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t epoch, std::size_t step)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(step) + ")"),
        epoch_(epoch),
        step_(step) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t epoch_;
  std::size_t step_;
};

/// Binary file does not match its declared layout.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " at byte offset " +
                           std::to_string(byte_offset)),
        offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace xbarprune
