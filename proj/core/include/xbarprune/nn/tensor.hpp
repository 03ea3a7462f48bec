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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace xbarprune::nn {

/// (n, c, h, w) extents of a rank-4 array.
struct Dims4 {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t count() const { return n * c * h * w; }
  /// Elements per sample (c * h * w).
  constexpr std::size_t per_sample() const { return c * h * w; }
  constexpr bool operator==(const Dims4&) const = default;

  std::string str() const;
};

/// Dense rank-4 array, row-major in (n, c, h, w) order.
template <typename T>
class BasicTensor4 {
 public:
  using value_type = T;

  BasicTensor4() = default;
  explicit BasicTensor4(Dims4 dims, T fill = T{0})
      : dims_(dims), data_(dims.count(), fill) {}

  const Dims4& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h,
                     std::size_t w) const {
    return ((n * dims_.c + c) * dims_.h + h) * dims_.w + w;
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[offset(n, c, h, w)];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t h,
                      std::size_t w) const {
    return data_[offset(n, c, h, w)];
  }

  /// Same data, new extents; element count must match.
  void reshape(Dims4 dims);
  void fill(T v);
  bool all_finite() const;

  bool operator==(const BasicTensor4&) const = default;

 private:
  Dims4 dims_;
  std::vector<T> data_;
};

using Tensor4 = BasicTensor4<float>;

/// Per-weight keep/prune indicator aligned with a weight tensor.
class PruneMask {
 public:
  PruneMask() = default;
  explicit PruneMask(Dims4 dims, bool keep = true)
      : dims_(dims), keep_(dims.count(), keep ? 1 : 0) {}

  const Dims4& dims() const { return dims_; }
  std::size_t size() const { return keep_.size(); }

  bool kept(std::size_t i) const { return keep_[i] != 0; }
  void set(std::size_t i, bool keep) { keep_[i] = keep ? 1 : 0; }
  void prune(std::size_t i) { keep_[i] = 0; }

  std::span<const std::uint8_t> bits() const { return keep_; }

  std::size_t kept_count() const;
  std::size_t pruned_count() const { return size() - kept_count(); }
  /// pruned / total; 0 for an empty mask.
  double sparsity() const;

  bool operator==(const PruneMask&) const = default;

 private:
  Dims4 dims_;
  std::vector<std::uint8_t> keep_;
};

}  // namespace xbarprune::nn
