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

// Prune -> retrain -> map -> simulate, for one method or all of them.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xbarprune/harness/config.hpp"
#include "xbarprune/harness/dataset.hpp"
#include "xbarprune/harness/report.hpp"
#include "xbarprune/perf/pipeline.hpp"
#include "xbarprune/pruner/checkpoint.hpp"
#include "xbarprune/pruner/prune.hpp"
#include "xbarprune/xbar/footprint.hpp"

namespace xbarprune::harness {

/// "realprune", "ltp", "column", "block".
const std::vector<std::string>& method_names();

/// The configured architecture for this dataset, Xavier-initialized with
/// cfg.prune.init_seed.
nn::Model initial_model(const ExperimentConfig& cfg, const DatasetPair& data);

/// Runs one pruning method from `initial`.
pruner::PruneResult run_method(const std::string& method, const nn::Model& initial,
                               const DatasetPair& data, const ExperimentConfig& cfg,
                               const pruner::LoopObserver& observer = {});

/// Crossbar budget named by cfg.sim.budget for a model whose unpruned
/// stages are `unpruned`.
std::size_t resolve_budget(const ExperimentConfig& cfg,
                           const std::vector<perf::StageCost>& unpruned);

/// Hardware view of a (pruned) model.
struct HardwareSummary {
  xbar::ModelFootprint footprint;
  std::size_t budget = 0;
  perf::ReplicationPlan unpruned_plan;
  perf::ReplicationPlan pruned_plan;
  double speedup = 1.0;
};

/// Footprint, replication plans and iso-area speedup. Depends only on the
/// masks, so it is recomputable from a checkpoint.
HardwareSummary analyze_hardware(const nn::Model& model, const ExperimentConfig& cfg,
                                 std::optional<std::size_t> budget_override = std::nullopt);

/// Report row from a checkpoint plus the F-epoch accuracy.
MethodRow make_row(const pruner::MaskCheckpoint& ck, const ExperimentConfig& cfg,
                   double final_accuracy, std::size_t iterations,
                   const std::string& stop_reason);

/// Prunes with every method, retrains each mask for F epochs and collects
/// a report. Checkpoints go to `out_dir` when given.
RunReport compare(const ExperimentConfig& cfg, const DatasetPair& data,
                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace xbarprune::harness
