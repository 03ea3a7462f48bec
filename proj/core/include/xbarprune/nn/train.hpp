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
#include <functional>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/nn/ops.hpp"

namespace xbarprune::nn {

/// Labeled images, (n, c, h, w) plus one class index per sample.
struct Dataset {
  Tensor4 images;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  /// Copy of the given samples, in order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct TrainConfig {
  double lr0 = 0.1;
  /// Multiplicative decay per epoch: lr(e) = lr0 * (1 - decay)^e.
  double lr_decay_per_epoch = 0.05;
  std::size_t batch_size = 128;
  std::size_t epochs = 1;
  /// Seeds the per-epoch shuffle.
  std::uint64_t rng_seed = 0;

  double lr_at(std::size_t epoch) const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

/// Optional callbacks into the training loop.
struct TrainHooks {
  /// Adjusts gradients after backward(), before the update (e.g. a group
  /// penalty term). Must keep pruned positions at zero.
  std::function<void(const Model&, Gradients<float>&)> on_gradients;
  /// Observes the model after every SGD step.
  std::function<void(const Model&, std::size_t epoch, std::size_t step)>
      after_step;
};

/// Mini-batch SGD on softmax cross-entropy. A trailing batch shorter than
/// batch_size takes a step scaled by len / batch_size. Deterministic for fixed
/// (model, data, cfg). Throws TrainingDiverged if the loss goes non-finite.
TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg,
                   const TrainHooks& hooks = {});

/// Fraction of samples whose argmax logit (lowest index on ties) equals the
/// label. Throws InvalidInput on an empty dataset.
double evaluate(const Model& model, const Dataset& data,
                std::size_t batch_size = 256);

}  // namespace xbarprune::nn
