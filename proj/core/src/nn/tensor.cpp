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

#include "xbarprune/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xbarprune/errors.hpp"

namespace xbarprune::nn {

std::string Dims4::str() const {
  return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " +
         std::to_string(h) + ", " + std::to_string(w) + ")";
}

template <typename T>
void BasicTensor4<T>::reshape(Dims4 dims) {
  if (dims.count() != data_.size()) {
    throw InvalidInput("reshape " + dims_.str() + " -> " + dims.str() +
                       " changes element count");
  }
  dims_ = dims;
}

template <typename T>
void BasicTensor4<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
bool BasicTensor4<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template class BasicTensor4<float>;
template class BasicTensor4<double>;

std::size_t PruneMask::kept_count() const {
  return static_cast<std::size_t>(
      std::count_if(keep_.begin(), keep_.end(), [](auto b) { return b != 0; }));
}

double PruneMask::sparsity() const {
  if (keep_.empty()) return 0.0;
  return static_cast<double>(pruned_count()) / static_cast<double>(size());
}

}  // namespace xbarprune::nn
