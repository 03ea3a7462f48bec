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

#include "xbarprune/perf/pipeline.hpp"

#include <algorithm>

#include "xbarprune/errors.hpp"

namespace xbarprune::perf {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

std::size_t layer_cycles(std::size_t windows, std::size_t r, std::size_t kappa) {
  if (r < 1) throw InvalidInput("replication factor must be at least 1");
  if (windows < 1) throw InvalidInput("a stage needs at least one window");
  return kappa * ceil_div(windows, r);
}

std::vector<std::size_t> ReplicationPlan::replication() const {
  std::vector<std::size_t> r;
  r.reserve(stages.size());
  for (const auto& s : stages) r.push_back(s.r);
  return r;
}

std::size_t min_footprint(const std::vector<StageCost>& stages) {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.W + s.A;
  return n;
}

ReplicationPlan make_plan(const std::vector<StageCost>& stages,
                          const std::vector<std::size_t>& r, std::size_t budget,
                          const SimConfig& cfg) {
  if (r.size() != stages.size()) {
    throw InvalidInput("replication vector has " + std::to_string(r.size()) +
                       " entries for " + std::to_string(stages.size()) + " stages");
  }
  if (!(cfg.freq_hz > 0.0)) throw InvalidInput("frequency must be positive");
  ReplicationPlan plan;
  plan.budget = budget;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    StageTiming t;
    t.cost = stages[i];
    t.r = r[i];
    t.cycles = layer_cycles(stages[i].windows, r[i], cfg.kappa);
    t.time_us = static_cast<double>(t.cycles) / cfg.freq_hz * 1e6;
    plan.xbars_used += r[i] * stages[i].W + stages[i].A;
    plan.pipeline_cycles = std::max(plan.pipeline_cycles, t.cycles);
    plan.stages.push_back(t);
  }
  plan.pipeline_time_us = static_cast<double>(plan.pipeline_cycles) / cfg.freq_hz * 1e6;
  return plan;
}

ReplicationPlan allocate_replication(const std::vector<StageCost>& stages,
                                     std::size_t budget, const SimConfig& cfg) {
  const std::size_t need = min_footprint(stages);
  if (budget < need) {
    throw InvalidInput("budget of " + std::to_string(budget) + " crossbars is " +
                       std::to_string(need - budget) + " short of the model's " +
                       std::to_string(need));
  }
  std::vector<std::size_t> r(stages.size(), 1);
  std::size_t used = need;
  while (!stages.empty()) {
    std::size_t slow = 0;
    std::size_t slow_cycles = 0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const std::size_t c = layer_cycles(stages[i].windows, r[i], cfg.kappa);
      if (c > slow_cycles) {
        slow = i;
        slow_cycles = c;
      }
    }
    const std::size_t win = stages[slow].windows;
    const std::size_t per = ceil_div(win, r[slow]);
    if (per == 1) break;
    // Smallest r' with ceil(win / r') <= per - 1.
    const std::size_t next = ceil_div(win, per - 1);
    const std::size_t extra = (next - r[slow]) * stages[slow].W;
    if (used + extra > budget) break;
    used += extra;
    r[slow] = next;
  }
  return make_plan(stages, r, budget, cfg);
}

std::vector<StageCost> stages_from_footprint(const xbar::ModelFootprint& fp, bool pruned) {
  std::vector<StageCost> out;
  out.reserve(fp.layers.size());
  for (const auto& l : fp.layers) {
    StageCost s;
    s.layer = l.layer;
    s.out_h = l.out_h;
    s.out_w = l.out_w;
    s.windows = l.positions;
    s.W = pruned ? l.weight_xbars_pruned : l.weight_xbars_unpruned;
    s.A = pruned ? l.act_xbars_pruned : l.act_xbars_unpruned;
    out.push_back(s);
  }
  return out;
}

double iso_area_speedup(const std::vector<StageCost>& unpruned,
                        const std::vector<StageCost>& pruned, std::size_t budget,
                        const SimConfig& cfg) {
  const auto a = allocate_replication(unpruned, budget, cfg);
  const auto b = allocate_replication(pruned, budget, cfg);
  return static_cast<double>(a.pipeline_cycles) / static_cast<double>(b.pipeline_cycles);
}

IsoPerfResult iso_perf_xbars(const std::vector<StageCost>& unpruned,
                             const std::vector<StageCost>& pruned,
                             const std::vector<std::size_t>& r) {
  if (unpruned.size() != pruned.size() || r.size() != pruned.size()) {
    throw InvalidInput("iso-performance comparison needs matching stage lists");
  }
  IsoPerfResult res;
  for (std::size_t i = 0; i < r.size(); ++i) {
    res.unpruned_xbars += r[i] * unpruned[i].W + unpruned[i].A;
    res.pruned_xbars += r[i] * pruned[i].W + pruned[i].A;
  }
  if (res.unpruned_xbars > 0) {
    res.savings = 1.0 - static_cast<double>(res.pruned_xbars) /
                            static_cast<double>(res.unpruned_xbars);
  }
  return res;
}

void write_plan_csv(std::ostream& os, const ReplicationPlan& plan) {
  os << "layer,O,windows,W,A,r,cycles,time_us\n";
  for (const auto& s : plan.stages) {
    os << s.cost.layer << ',' << s.cost.out_h << ',' << s.cost.windows << ','
       << s.cost.W << ',' << s.cost.A << ',' << s.r << ',' << s.cycles << ','
       << s.time_us << '\n';
  }
}

nlohmann::json plan_to_json(const ReplicationPlan& plan, double speedup) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : plan.stages) {
    stages.push_back({{"layer", s.cost.layer},
                      {"O", s.cost.out_h},
                      {"windows", s.cost.windows},
                      {"W", s.cost.W},
                      {"A", s.cost.A},
                      {"r", s.r},
                      {"cycles", s.cycles},
                      {"time_us", s.time_us}});
  }
  return {{"pipeline_time_us", plan.pipeline_time_us},
          {"speedup", speedup},
          {"xbars_used", plan.xbars_used},
          {"budget", plan.budget},
          {"stages", std::move(stages)}};
}

}  // namespace xbarprune::perf
