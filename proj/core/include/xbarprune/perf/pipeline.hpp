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

// Layer-pipelined training throughput model.
//
// Every trainable layer is one pipeline stage. A stage performs one MVM per
// output window per cycle on each replica of its weights, and training
// costs kappa passes (forward, error backward, weight gradient), so
//   cycles = kappa * ceil(windows / r),  time = cycles / freq.
// The slowest stage sets the pipeline time. Replicas copy weight crossbars
// only; stored activations are shared.

#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <ostream>
#include <vector>

#include "xbarprune/xbar/footprint.hpp"

namespace xbarprune::perf {

/// Crossbar demand of one pipeline stage.
struct StageCost {
  std::size_t layer = 0;
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  std::size_t windows = 1;  ///< MVM passes per image
  std::size_t W = 0;        ///< weight crossbars per replica
  std::size_t A = 0;        ///< activation crossbars
};

struct SimConfig {
  std::size_t kappa = 3;
  double freq_hz = 1e7;
};

/// kappa * ceil(windows / r). Throws InvalidInput for r < 1 or windows < 1.
std::size_t layer_cycles(std::size_t windows, std::size_t r, std::size_t kappa);

struct StageTiming {
  StageCost cost;
  std::size_t r = 1;
  std::size_t cycles = 0;
  double time_us = 0.0;
};

struct ReplicationPlan {
  std::vector<StageTiming> stages;
  std::size_t budget = 0;
  std::size_t xbars_used = 0;  ///< sum of r * W + A
  std::size_t pipeline_cycles = 0;
  double pipeline_time_us = 0.0;

  std::vector<std::size_t> replication() const;
};

/// sum of W + A: the crossbars needed to host the model once.
std::size_t min_footprint(const std::vector<StageCost>& stages);

/// Evaluates a given replication vector (no budget check beyond recording it).
ReplicationPlan make_plan(const std::vector<StageCost>& stages,
                          const std::vector<std::size_t>& r, std::size_t budget,
                          const SimConfig& cfg = {});

/// Greedy allocation: repeatedly take the slowest stage (lowest index on
/// ties) and raise its r to the smallest value that lowers its cycle count,
/// if the extra replicas fit the budget; stop otherwise. Throws InvalidInput
/// naming the shortfall when the budget cannot host the model once.
ReplicationPlan allocate_replication(const std::vector<StageCost>& stages,
                                     std::size_t budget, const SimConfig& cfg = {});

/// Stages of the pruned (or unpruned) model in a footprint.
std::vector<StageCost> stages_from_footprint(const xbar::ModelFootprint& fp, bool pruned);

/// pipeline_time(unpruned) / pipeline_time(pruned), each under its greedy
/// plan for the same budget. Throws if either model does not fit.
double iso_area_speedup(const std::vector<StageCost>& unpruned,
                        const std::vector<StageCost>& pruned, std::size_t budget,
                        const SimConfig& cfg = {});

struct IsoPerfResult {
  std::size_t unpruned_xbars = 0;
  std::size_t pruned_xbars = 0;
  double savings = 0.0;  ///< 1 - pruned / unpruned
};

/// Crossbars needed by both models at the same per-stage replication.
IsoPerfResult iso_perf_xbars(const std::vector<StageCost>& unpruned,
                             const std::vector<StageCost>& pruned,
                             const std::vector<std::size_t>& r);

/// Columns: layer, O, windows, W, A, r, cycles, time_us. O is the output
/// height (equal to the width for square maps).
void write_plan_csv(std::ostream& os, const ReplicationPlan& plan);

/// {pipeline_time_us, speedup, xbars_used, budget, stages: [...]}.
nlohmann::json plan_to_json(const ReplicationPlan& plan, double speedup);

}  // namespace xbarprune::perf
