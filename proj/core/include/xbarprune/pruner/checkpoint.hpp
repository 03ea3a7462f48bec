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

// Mask checkpoint: everything needed to rebuild a pruned, rewound model
// without the pruning run. The initial weights are not stored; they are
// regenerated from the architecture and init_seed.
//
// JSON layout (version 1):
//   {"format": "xbarprune-mask", "version": 1,
//    "model_hash": "<16 hex digits>", "architecture": {...},
//    "init_seed": N, "method": "realprune",
//    "baseline_accuracy": x, "accuracy": x,
//    "granularity_history": ["filter", ...],
//    "accuracy_log": [{"iteration", "granularity", "sparsity",
//                      "accuracy", "accepted"}, ...],
//    "layers": [{"layer": i, "shape": [oc, ic, k, k], "keep": "<hex>"}]}
// "keep" is the layer's keep bitset, LSB-first within each byte.

#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/pruner/prune.hpp"

namespace xbarprune::pruner {

struct AccuracyLogEntry {
  std::size_t iteration = 0;
  std::string granularity;
  double sparsity = 0.0;
  double accuracy = 0.0;
  bool accepted = false;

  bool operator==(const AccuracyLogEntry&) const = default;
};

struct MaskCheckpoint {
  std::string model_hash;
  nlohmann::json architecture;
  std::uint64_t init_seed = 0;
  std::string method;
  double baseline_accuracy = 0.0;
  double accuracy = 0.0;
  std::vector<std::string> granularity_history;
  std::vector<AccuracyLogEntry> accuracy_log;
  std::vector<nn::PruneMask> masks;
};

MaskCheckpoint make_checkpoint(const PruneResult& result, std::uint64_t init_seed,
                               const std::string& method);

nlohmann::json checkpoint_to_json(const MaskCheckpoint& ck);
/// Validates format, version, hash and bitset lengths; throws InvalidInput.
MaskCheckpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const MaskCheckpoint& ck, const std::filesystem::path& path);
MaskCheckpoint load_checkpoint(const std::filesystem::path& path);

/// The pruned model rewound to its initialization: Xavier init from
/// init_seed, then the masks.
nn::Model model_from_checkpoint(const MaskCheckpoint& ck);

}  // namespace xbarprune::pruner
