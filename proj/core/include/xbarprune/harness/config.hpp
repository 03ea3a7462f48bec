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
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "xbarprune/nn/train.hpp"
#include "xbarprune/pruner/prune.hpp"
#include "xbarprune/xbar/crossbar.hpp"

namespace xbarprune::harness {

struct DatasetConfig {
  /// "mnist", "cifar10" or "synthetic-blobs".
  std::string name = "mnist";
  /// Directory with the dataset files; empty means $XBARPRUNE_DATA/<name>,
  /// then ./data/<name>.
  std::string path;
  /// 0 takes every available sample.
  std::size_t train_subset = 5000;
  std::size_t test_subset = 1000;
  std::uint64_t seed = 0;
  // synthetic-blobs only
  std::size_t blob_classes = 4;
  std::size_t blob_side = 8;
  double blob_noise = 1.0;
  std::size_t blob_train = 512;
  std::size_t blob_test = 256;
};

struct ModelConfig {
  /// "mini-vgg", "mini-res" or "tiny"; ignored when `layers` is set.
  std::string preset = "mini-vgg";
  /// Optional inline layer list (same schema as checkpoint architectures).
  nlohmann::json layers;
};

struct PruneSettings {
  /// "realprune", "ltp", "column" or "block".
  std::string method = "realprune";
  double p = 0.25;
  std::size_t E = 3;
  std::size_t F = 20;
  std::size_t max_iter = 30;
  /// Fraction, not percentage points: 0.002 is 0.2 points.
  double acc_slack = 0.002;
  std::uint64_t init_seed = 1;
  std::size_t block_h = 4;
  std::size_t block_w = 4;
  double group_lasso = 0.0;
};

struct SimSettings {
  /// "unpruned" (minimal unpruned footprint), "chip" (tiles * xbars/tile)
  /// or a decimal crossbar count.
  std::string budget = "unpruned";
  std::size_t kappa = 3;
  std::size_t in_flight = 1;
};

struct ExperimentConfig {
  ModelConfig model;
  DatasetConfig dataset;
  nn::TrainConfig train;
  PruneSettings prune;
  xbar::CrossbarConfig crossbar;
  SimSettings sim;

  /// The loop settings derived from `prune`, `train` and `crossbar`.
  pruner::PruneConfig prune_config() const;
};

/// Every field is optional; unknown keys are rejected (InvalidInput).
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Full config with every field written out.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// FNV-1a of the canonical JSON dump, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace xbarprune::harness
