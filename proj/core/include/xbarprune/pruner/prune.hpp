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

// Iterative magnitude pruning with rewinding to the initial weights.
//
// One iteration: score groups on the trained weights, prune the lowest
// fraction p of the kept weight mass, rewind the survivors to their initial
// values, retrain for E epochs and evaluate. A retrain that falls more than
// acc_slack below the unpruned baseline is undone; the loop then moves to
// the next finer granularity of its schedule or stops.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/nn/train.hpp"
#include "xbarprune/pruner/groups.hpp"

namespace xbarprune::pruner {

/// Masks and weights captured right before a prune step.
struct Snapshot {
  std::vector<nn::PruneMask> masks;
  std::vector<nn::Tensor4> weights;
};

/// Outcome of one prune_step.
struct StepResult {
  std::size_t groups_pruned = 0;
  std::size_t weights_pruned = 0;
  /// p * kept weights before the step.
  double target = 0.0;
  /// target - weights_pruned; positive when the overshoot guard stopped early.
  double shortfall = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;  ///< 1-based
  Granularity granularity;
  StepResult step;
  double sparsity = 0.0;      ///< after the step
  double accuracy = 0.0;      ///< after rewind + E-epoch retrain
  bool accepted = false;
};

struct PruneState {
  /// The archived initial weights every rewind returns to.
  std::vector<nn::Tensor4> w_initial;
  Granularity granularity;
  std::size_t iteration = 0;
  double baseline_accuracy = 0.0;
  std::optional<Snapshot> snapshot;
  std::vector<IterationRecord> history;

  /// Archives the model's current weights as w_initial.
  static PruneState archive(const nn::Model& model);
};

/// Prunes the lowest-scored groups (network-wide, ties by (layer, group
/// index)) until their kept mass approaches p * kept weights. A group is
/// taken only if that leaves the running total closer to the target than
/// stopping before it; the first group that fails ends the step. A group
/// holding every remaining kept weight of its layer is skipped. Records a
/// snapshot of the pre-step model in `state`. A result with zero groups
/// pruned means nothing was prunable at this granularity; the snapshot is
/// still recorded.
StepResult prune_step(PruneState& state, nn::Model& model, double p,
                      const Granularity& g, std::size_t xbar_size = 128);

/// Kept weights <- w_initial, pruned weights <- 0. Throws InvalidInput when
/// the archive is missing or does not match the model.
void rewind(const PruneState& state, nn::Model& model);

/// Restores the snapshot bit-exactly and consumes it. Throws InvalidInput
/// when there is no snapshot.
void undo_last(PruneState& state, nn::Model& model);

/// Loop events reported to an observer.
enum class LoopEvent { BaselineTrained, Pruned, Rewound, Retrained, Undone, Finished };

std::string loop_event_name(LoopEvent e);

struct LoopObserver {
  std::function<void(LoopEvent, const nn::Model&, const PruneState&)> on_event;
  /// Forwarded to every training run as TrainHooks::after_step.
  std::function<void(const nn::Model&, std::size_t epoch, std::size_t step)> after_step;
};

struct PruneConfig {
  double p = 0.25;
  std::size_t epochs = 3;        ///< E: retrain length inside the loop
  std::size_t final_epochs = 20; ///< F: retrain length of the final mask
  std::size_t max_iter = 30;
  /// Allowed accuracy drop, as a fraction (0.002 = 0.2 percentage points).
  double acc_slack = 0.002;
  std::size_t xbar_size = 128;
  /// Weight of the optional group penalty lambda * sum_g ||w_g||_2 added to
  /// the training loss, over the groups of the current granularity.
  double group_lasso = 0.0;
  /// Everything except `epochs`, which the loop sets.
  nn::TrainConfig train;
};

struct PruneResult {
  /// Best accepted mask, weights rewound to w_initial.
  nn::Model model;
  double baseline_accuracy = 0.0;
  /// E-epoch retrain accuracy of the returned mask (baseline if unpruned).
  double accuracy = 0.0;
  std::vector<IterationRecord> history;
  /// Granularity in force at the start and after every switch.
  std::vector<Granularity> granularity_history;
  /// Why the loop ended: "max_iter", "accuracy_drop" or "exhausted".
  std::string stop_reason;
};

/// The generic loop over a coarse-to-fine granularity schedule. `model`
/// holds the initial weights (and optionally an initial mask).
PruneResult run_schedule(const nn::Model& model, const nn::Dataset& train,
                         const nn::Dataset& test, const PruneConfig& cfg,
                         const std::vector<Granularity>& schedule,
                         const LoopObserver& observer = {});

/// Filter -> Channel -> Index.
PruneResult run_realprune(const nn::Model& model, const nn::Dataset& train,
                          const nn::Dataset& test, const PruneConfig& cfg,
                          const LoopObserver& observer = {});

/// Unstructured magnitude pruning, no granularity switches.
PruneResult run_ltp(const nn::Model& model, const nn::Dataset& train,
                    const nn::Dataset& test, const PruneConfig& cfg,
                    const LoopObserver& observer = {});

/// ColumnGroup or BlockGroup only.
PruneResult run_group_baseline(const nn::Model& model, const nn::Dataset& train,
                               const nn::Dataset& test, const PruneConfig& cfg,
                               const Granularity& g, const LoopObserver& observer = {});

/// Gradient hook adding lambda * w / ||w_g|| for every group g with a
/// non-zero norm. Group membership is fixed at construction.
std::function<void(const nn::Model&, nn::Gradients<float>&)> make_group_lasso_hook(
    const nn::Model& model, const Granularity& g, double lambda,
    std::size_t xbar_size = 128);

/// Trains `model` (already rewound) for cfg.final_epochs and returns its
/// test accuracy.
double final_retrain(nn::Model& model, const nn::Dataset& train,
                     const nn::Dataset& test, const PruneConfig& cfg,
                     const LoopObserver& observer = {});

}  // namespace xbarprune::pruner
