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
#include <span>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/nn/tensor.hpp"

namespace xbarprune::nn {

/// Everything backward() needs from the matching forward(): the input of
/// every layer, the im2col buffers of conv layers and the argmax of every
/// pooling window.
template <typename T>
struct ForwardCache {
  const BasicModel<T>* model = nullptr;
  std::size_t batch = 0;
  /// inputs[i] is the input of layer i; inputs[L] is the logits tensor.
  std::vector<BasicTensor4<T>> inputs;
  std::vector<std::vector<T>> columns;
  std::vector<std::vector<std::uint32_t>> argmax;
};

template <typename T>
struct ForwardResult {
  BasicTensor4<T> logits;  ///< (n, classes, 1, 1)
  ForwardCache<T> cache;
};

/// Per-trainable-layer weight gradients, aligned with model.weights().
template <typename T>
struct Gradients {
  std::vector<BasicTensor4<T>> weights;
};

template <typename T>
struct LossResult {
  double loss = 0.0;      ///< mean over the batch
  BasicTensor4<T> grad;   ///< d loss / d logits
  std::size_t correct = 0;
};

/// Xavier-uniform initialization: each weight i.i.d. on [-b, b] with
/// b = sqrt(6 / (fan_in + fan_out)), fan_in = ic*k*k, fan_out = oc*k*k.
/// Pruned positions are left at zero.
template <typename T>
void xavier_init(BasicModel<T>& model, std::uint64_t seed);

/// Xavier bound b for one trainable layer.
double xavier_bound(const LayerDef& layer);

template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model,
                         const BasicTensor4<T>& batch);

/// Weight gradients for loss_grad = d loss / d logits. Gradients at pruned
/// positions are exactly zero. Throws InvalidInput when the cache does not
/// belong to this model or does not match loss_grad.
template <typename T>
Gradients<T> backward(const BasicModel<T>& model, const ForwardCache<T>& cache,
                      const BasicTensor4<T>& loss_grad);

/// w -= lr * g on kept weights; pruned weights stay exactly zero. Throws
/// TrainingDiverged on a non-finite gradient.
template <typename T>
void sgd_step(BasicModel<T>& model, const Gradients<T>& grads, T lr);

/// Mean softmax cross-entropy over the batch and its gradient.
template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor4<T>& logits,
                                    std::span<const int> labels);

/// argmax over classes of one sample; ties go to the lowest index.
template <typename T>
std::size_t argmax_class(const BasicTensor4<T>& logits, std::size_t sample);

}  // namespace xbarprune::nn
