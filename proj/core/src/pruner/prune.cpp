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

#include "xbarprune/pruner/prune.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "xbarprune/errors.hpp"

namespace xbarprune::pruner {

PruneState PruneState::archive(const nn::Model& model) {
  PruneState s;
  s.w_initial = model.weights();
  return s;
}

StepResult prune_step(PruneState& state, nn::Model& model, double p,
                      const Granularity& g, std::size_t xbar_size) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidInput("prune fraction p must lie in (0, 1), got " + std::to_string(p));
  }
  auto groups = group_scores(model, g, xbar_size);
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.slot != b.slot) return a.slot < b.slot;
    return a.index < b.index;
  });

  state.snapshot = Snapshot{model.masks(), model.weights()};
  state.granularity = g;

  StepResult r;
  r.target = p * static_cast<double>(model.kept_weights());
  double cum = 0.0;
  std::vector<std::size_t> left;
  for (const auto& m : model.masks()) left.push_back(m.kept_count());
  for (const Group& grp : groups) {
    if (cum >= r.target) break;
    // Never empty a layer: a network with a dead layer has no live output.
    if (grp.kept >= left[grp.slot]) continue;
    const double after = cum + static_cast<double>(grp.kept);
    // Overshoot guard: stop unless taking the group lands closer to target.
    if (after - r.target > r.target - cum) break;
    auto& mask = model.masks()[grp.slot];
    for (std::size_t idx : grp.members) mask.prune(idx);
    cum = after;
    left[grp.slot] -= grp.kept;
    ++r.groups_pruned;
  }
  model.apply_masks();
  r.weights_pruned = static_cast<std::size_t>(cum);
  r.shortfall = r.target - cum;
  return r;
}

void rewind(const PruneState& state, nn::Model& model) {
  if (state.w_initial.size() != model.num_trainable()) {
    throw InvalidInput("rewind: no initial weights archived for this model");
  }
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const auto& init = state.w_initial[t];
    auto& w = model.weights()[t];
    if (!(init.dims() == w.dims())) {
      throw InvalidInput("rewind: archived weights of layer " + std::to_string(t) +
                         " have dims " + init.dims().str() + ", model has " +
                         w.dims().str());
    }
    const auto& mask = model.masks()[t];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = mask.kept(i) ? init[i] : 0.0f;
  }
}

void undo_last(PruneState& state, nn::Model& model) {
  if (!state.snapshot) throw InvalidInput("undo_last: no prune step to undo");
  model.masks() = std::move(state.snapshot->masks);
  model.weights() = std::move(state.snapshot->weights);
  state.snapshot.reset();
}

std::string loop_event_name(LoopEvent e) {
  switch (e) {
    case LoopEvent::BaselineTrained: return "baseline_trained";
    case LoopEvent::Pruned: return "pruned";
    case LoopEvent::Rewound: return "rewound";
    case LoopEvent::Retrained: return "retrained";
    case LoopEvent::Undone: return "undone";
    case LoopEvent::Finished: return "finished";
  }
  return "?";
}

std::function<void(const nn::Model&, nn::Gradients<float>&)> make_group_lasso_hook(
    const nn::Model& model, const Granularity& g, double lambda, std::size_t xbar_size) {
  auto groups = std::make_shared<std::vector<Group>>(enumerate_groups(model, g, xbar_size));
  return [groups, lambda](const nn::Model& m, nn::Gradients<float>& grads) {
    for (const Group& grp : *groups) {
      const auto& w = m.weights()[grp.slot];
      const auto& mask = m.masks()[grp.slot];
      double sq = 0.0;
      for (std::size_t idx : grp.members) {
        if (mask.kept(idx)) sq += static_cast<double>(w[idx]) * w[idx];
      }
      if (sq <= 0.0) continue;
      const double scale = lambda / std::sqrt(sq);
      auto& gw = grads.weights[grp.slot];
      for (std::size_t idx : grp.members) {
        if (mask.kept(idx)) gw[idx] += static_cast<float>(scale * w[idx]);
      }
    }
  };
}

namespace {

nn::TrainHooks make_hooks(const nn::Model& model, const PruneConfig& cfg,
                          const Granularity& g, const LoopObserver& observer) {
  nn::TrainHooks hooks;
  hooks.after_step = observer.after_step;
  if (cfg.group_lasso > 0.0) {
    hooks.on_gradients = make_group_lasso_hook(model, g, cfg.group_lasso, cfg.xbar_size);
  }
  return hooks;
}

void notify(const LoopObserver& o, LoopEvent e, const nn::Model& m, const PruneState& s) {
  if (o.on_event) o.on_event(e, m, s);
}

}  // namespace

PruneResult run_schedule(const nn::Model& model, const nn::Dataset& train,
                         const nn::Dataset& test, const PruneConfig& cfg,
                         const std::vector<Granularity>& schedule,
                         const LoopObserver& observer) {
  if (schedule.empty()) throw InvalidInput("granularity schedule is empty");
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) {
    throw InvalidInput("prune fraction p must lie in (0, 1)");
  }
  if (!(cfg.acc_slack >= 0.0)) throw InvalidInput("acc_slack must be non-negative");

  nn::Model current = model;
  current.apply_masks();
  PruneState state = PruneState::archive(current);

  nn::TrainConfig tc = cfg.train;
  tc.epochs = cfg.epochs;

  std::size_t g = 0;
  state.granularity = schedule[g];
  PruneResult result;
  result.granularity_history.push_back(schedule[g]);
  nn::TrainHooks hooks = make_hooks(current, cfg, schedule[g], observer);

  nn::train(current, train, tc, hooks);
  const double baseline = nn::evaluate(current, test);
  state.baseline_accuracy = baseline;
  notify(observer, LoopEvent::BaselineTrained, current, state);

  std::vector<nn::PruneMask> best_masks = current.masks();
  double best_acc = baseline;

  auto advance = [&]() {
    if (g + 1 >= schedule.size()) return false;
    ++g;
    state.granularity = schedule[g];
    result.granularity_history.push_back(schedule[g]);
    hooks = make_hooks(current, cfg, schedule[g], observer);
    return true;
  };

  result.stop_reason = "max_iter";
  while (state.iteration < cfg.max_iter) {
    const StepResult step = prune_step(state, current, cfg.p, schedule[g], cfg.xbar_size);
    if (step.groups_pruned == 0) {
      state.snapshot.reset();
      if (!advance()) {
        result.stop_reason = "exhausted";
        break;
      }
      continue;
    }
    ++state.iteration;
    notify(observer, LoopEvent::Pruned, current, state);
    rewind(state, current);
    notify(observer, LoopEvent::Rewound, current, state);
    nn::train(current, train, tc, hooks);
    const double acc = nn::evaluate(current, test);
    notify(observer, LoopEvent::Retrained, current, state);

    IterationRecord rec;
    rec.iteration = state.iteration;
    rec.granularity = schedule[g];
    rec.step = step;
    rec.sparsity = current.sparsity();
    rec.accuracy = acc;
    rec.accepted = acc >= baseline - cfg.acc_slack;
    state.history.push_back(rec);

    if (rec.accepted) {
      best_masks = current.masks();
      best_acc = acc;
      continue;
    }
    // The snapshot holds the trained weights of the last accepted mask, so
    // the next (finer) step can score them without retraining.
    undo_last(state, current);
    notify(observer, LoopEvent::Undone, current, state);
    if (!advance()) {
      result.stop_reason = "accuracy_drop";
      break;
    }
  }

  result.model = model;
  result.model.masks() = std::move(best_masks);
  rewind(state, result.model);
  result.baseline_accuracy = baseline;
  result.accuracy = best_acc;
  result.history = state.history;
  notify(observer, LoopEvent::Finished, result.model, state);
  return result;
}

PruneResult run_realprune(const nn::Model& model, const nn::Dataset& train,
                          const nn::Dataset& test, const PruneConfig& cfg,
                          const LoopObserver& observer) {
  return run_schedule(model, train, test, cfg,
                      {Granularity::filter(), Granularity::channel(), Granularity::index()},
                      observer);
}

PruneResult run_ltp(const nn::Model& model, const nn::Dataset& train,
                    const nn::Dataset& test, const PruneConfig& cfg,
                    const LoopObserver& observer) {
  return run_schedule(model, train, test, cfg, {Granularity::unstructured()}, observer);
}

PruneResult run_group_baseline(const nn::Model& model, const nn::Dataset& train,
                               const nn::Dataset& test, const PruneConfig& cfg,
                               const Granularity& g, const LoopObserver& observer) {
  if (g.kind != GranularityKind::ColumnGroup && g.kind != GranularityKind::BlockGroup) {
    throw InvalidInput("group baseline needs column or block granularity, got " + g.name());
  }
  return run_schedule(model, train, test, cfg, {g}, observer);
}

double final_retrain(nn::Model& model, const nn::Dataset& train, const nn::Dataset& test,
                     const PruneConfig& cfg, const LoopObserver& observer) {
  nn::TrainConfig tc = cfg.train;
  tc.epochs = cfg.final_epochs;
  nn::TrainHooks hooks;
  hooks.after_step = observer.after_step;
  nn::train(model, train, tc, hooks);
  return nn::evaluate(model, test);
}

}  // namespace xbarprune::pruner
