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

#include "xbarprune/harness/experiment.hpp"

#include <charconv>

#include "xbarprune/errors.hpp"
#include "xbarprune/harness/presets.hpp"
#include "xbarprune/nn/ops.hpp"

namespace xbarprune::harness {

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"realprune", "ltp", "column", "block"};
  return names;
}

nn::Model initial_model(const ExperimentConfig& cfg, const DatasetPair& data) {
  if (data.train.empty()) throw InvalidInput("training set is empty");
  const nn::Dims4& d = data.train.images.dims();
  nn::Model m = build_model(cfg.model, nn::Shape3{1, d.c, d.h, d.w}, data.train.num_classes);
  nn::xavier_init(m, cfg.prune.init_seed);
  return m;
}

pruner::PruneResult run_method(const std::string& method, const nn::Model& initial,
                               const DatasetPair& data, const ExperimentConfig& cfg,
                               const pruner::LoopObserver& observer) {
  const pruner::PruneConfig pc = cfg.prune_config();
  if (method == "realprune") return pruner::run_realprune(initial, data.train, data.test, pc, observer);
  if (method == "ltp") return pruner::run_ltp(initial, data.train, data.test, pc, observer);
  if (method == "column") {
    return pruner::run_group_baseline(initial, data.train, data.test, pc,
                                      pruner::Granularity::column_group(), observer);
  }
  if (method == "block") {
    return pruner::run_group_baseline(
        initial, data.train, data.test, pc,
        pruner::Granularity::block_group(cfg.prune.block_h, cfg.prune.block_w), observer);
  }
  throw InvalidInput("unknown method '" + method + "' (realprune, ltp, column, block)");
}

std::size_t resolve_budget(const ExperimentConfig& cfg,
                           const std::vector<perf::StageCost>& unpruned) {
  const std::string& b = cfg.sim.budget;
  if (b == "unpruned") return perf::min_footprint(unpruned);
  if (b == "chip") return cfg.crossbar.total_budget();
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(b.data(), b.data() + b.size(), v);
  if (ec != std::errc{} || ptr != b.data() + b.size()) {
    throw InvalidInput("budget must be 'unpruned', 'chip' or a crossbar count, got '" + b + "'");
  }
  return v;
}

HardwareSummary analyze_hardware(const nn::Model& model, const ExperimentConfig& cfg,
                                 std::optional<std::size_t> budget_override) {
  HardwareSummary h;
  h.footprint = xbar::model_footprint(model, cfg.crossbar, cfg.sim.in_flight);
  const auto unpruned = perf::stages_from_footprint(h.footprint, false);
  const auto pruned = perf::stages_from_footprint(h.footprint, true);
  h.budget = budget_override ? *budget_override : resolve_budget(cfg, unpruned);
  const perf::SimConfig sim{cfg.sim.kappa, cfg.crossbar.freq_hz};
  h.unpruned_plan = perf::allocate_replication(unpruned, h.budget, sim);
  h.pruned_plan = perf::allocate_replication(pruned, h.budget, sim);
  h.speedup = static_cast<double>(h.unpruned_plan.pipeline_cycles) /
              static_cast<double>(h.pruned_plan.pipeline_cycles);
  return h;
}

MethodRow make_row(const pruner::MaskCheckpoint& ck, const ExperimentConfig& cfg,
                   double final_accuracy, std::size_t iterations,
                   const std::string& stop_reason) {
  const nn::Model m = pruner::model_from_checkpoint(ck);
  const HardwareSummary h = analyze_hardware(m, cfg);
  MethodRow row;
  row.method = ck.method;
  for (const auto& g : ck.granularity_history) {
    if (!row.granularities.empty()) row.granularities += '>';
    row.granularities += g;
  }
  row.iterations = iterations;
  row.stop_reason = stop_reason;
  row.sparsity = m.sparsity();
  row.baseline_accuracy = ck.baseline_accuracy;
  row.prune_accuracy = ck.accuracy;
  row.final_accuracy = final_accuracy;
  row.weight_xbars_unpruned = h.footprint.weight_xbars_unpruned();
  row.weight_xbars_pruned = h.footprint.weight_xbars_pruned();
  row.act_xbars_unpruned = h.footprint.act_xbars_unpruned();
  row.act_xbars_pruned = h.footprint.act_xbars_pruned();
  row.savings_fraction = h.footprint.savings_fraction();
  row.budget = h.budget;
  row.iso_area_speedup = h.speedup;
  return row;
}

RunReport compare(const ExperimentConfig& cfg, const DatasetPair& data,
                  const std::optional<std::filesystem::path>& out_dir) {
  RunReport report;
  report.config_hash = config_hash(cfg);
  report.init_seed = cfg.prune.init_seed;
  report.train_seed = cfg.train.rng_seed;
  report.started_at = utc_timestamp();
  const nn::Model initial = initial_model(cfg, data);
  const pruner::PruneConfig pc = cfg.prune_config();
  for (const auto& method : method_names()) {
    const pruner::PruneResult res = run_method(method, initial, data, cfg);
    const auto ck = pruner::make_checkpoint(res, cfg.prune.init_seed, method);
    nn::Model final_model = pruner::model_from_checkpoint(ck);
    const double final_acc = pruner::final_retrain(final_model, data.train, data.test, pc);
    MethodRow row = make_row(ck, cfg, final_acc, res.history.size(), res.stop_reason);
    if (out_dir) {
      row.checkpoint = "mask_" + method + ".json";
      pruner::save_checkpoint(ck, *out_dir / row.checkpoint);
    }
    report.rows.push_back(std::move(row));
  }
  report.finished_at = utc_timestamp();
  return report;
}

}  // namespace xbarprune::harness
