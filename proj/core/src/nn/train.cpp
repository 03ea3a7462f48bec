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

#include "xbarprune/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xbarprune/errors.hpp"
#include "xbarprune/rng.hpp"

namespace xbarprune::nn {

namespace {

Tensor4 gather(const Dataset& data, std::span<const std::size_t> idx,
               std::vector<int>& labels) {
  const Dims4& d = data.images.dims();
  const std::size_t per = d.per_sample();
  Tensor4 batch(Dims4{idx.size(), d.c, d.h, d.w});
  labels.resize(idx.size());
  for (std::size_t b = 0; b < idx.size(); ++b) {
    std::copy_n(data.images.data() + idx[b] * per, per, batch.data() + b * per);
    labels[b] = data.labels[idx[b]];
  }
  return batch;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.images = gather(*this, indices, out.labels);
  return out;
}

double TrainConfig::lr_at(std::size_t epoch) const {
  return lr0 * std::pow(1.0 - lr_decay_per_epoch, static_cast<double>(epoch));
}

TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg,
                   const TrainHooks& hooks) {
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  if (data.empty()) throw InvalidInput("train: empty dataset");
  if (cfg.batch_size == 0) throw InvalidInput("train: batch_size must be > 0");
  if (!(cfg.lr0 > 0.0) || !(cfg.lr_decay_per_epoch >= 0.0) ||
      !(cfg.lr_decay_per_epoch < 1.0)) {
    throw InvalidInput("train: learning-rate schedule must stay positive");
  }

  std::vector<std::size_t> order(data.size());
  std::vector<int> labels;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.rng_seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));

    const float lr = static_cast<float>(cfg.lr_at(epoch));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const Tensor4 batch =
          gather(data, std::span<const std::size_t>(order).subspan(start, len), labels);
      auto fwd = forward(model, batch);
      auto loss = softmax_cross_entropy(fwd.logits, std::span<const int>(labels));
      if (!std::isfinite(loss.loss)) {
        throw TrainingDiverged("non-finite training loss", epoch, step);
      }
      auto grads = backward(model, fwd.cache, loss.grad);
      if (hooks.on_gradients) hooks.on_gradients(model, grads);
      // A short final batch steps in proportion to its size, so every
      // sample carries the same weight within an epoch.
      const float step_lr = lr * static_cast<float>(len) / static_cast<float>(cfg.batch_size);
      try {
        sgd_step(model, grads, step_lr);
      } catch (const TrainingDiverged& e) {
        throw TrainingDiverged(e.what(), epoch, step);
      }
      if (hooks.after_step) hooks.after_step(model, epoch, step);
      loss_sum += loss.loss * static_cast<double>(len);
      correct += loss.correct;
      ++step;
    }
    history.push_back({epoch, static_cast<double>(lr),
                       loss_sum / static_cast<double>(order.size()),
                       static_cast<double>(correct) /
                           static_cast<double>(order.size())});
  }
  return history;
}

double evaluate(const Model& model, const Dataset& data,
                std::size_t batch_size) {
  if (data.empty()) throw InvalidInput("evaluate: empty dataset");
  if (batch_size == 0) batch_size = data.size();
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<int> labels;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, idx.size() - start);
    const Tensor4 batch =
        gather(data, std::span<const std::size_t>(idx).subspan(start, len), labels);
    const auto fwd = forward(model, batch);
    for (std::size_t s = 0; s < len; ++s) {
      if (argmax_class(fwd.logits, s) == static_cast<std::size_t>(labels[s])) {
        ++correct;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace xbarprune::nn
