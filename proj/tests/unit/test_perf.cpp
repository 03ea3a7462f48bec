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


#include <gtest/gtest.h>

#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "xbarprune/errors.hpp"
#include "xbarprune/perf/pipeline.hpp"
#include "xbarprune/rng.hpp"

namespace pf = xbarprune::perf;
using xbarprune::Rng;

namespace {

pf::StageCost stage(std::size_t windows, std::size_t W, std::size_t A = 0, std::size_t layer = 0) {
  pf::StageCost s;
  s.layer = layer;
  s.windows = windows;
  s.W = W;
  s.A = A;
  return s;
}

std::vector<oracle::Stage> to_oracle(const std::vector<pf::StageCost>& s) {
  std::vector<oracle::Stage> o;
  for (const auto& c : s) o.push_back({c.windows, c.W, c.A});
  return o;
}

std::size_t used(const std::vector<pf::StageCost>& s, const std::vector<std::size_t>& r) {
  std::size_t u = 0;
  for (std::size_t i = 0; i < s.size(); ++i) u += r[i] * s[i].W + s[i].A;
  return u;
}

}  // namespace

TEST(LayerCycles, Examples) {
  EXPECT_EQ(pf::layer_cycles(1024, 1, 3), 3072u);
  EXPECT_EQ(pf::layer_cycles(1024, 2, 3), 1536u);
  EXPECT_EQ(pf::layer_cycles(25, 4, 1), 7u);
  EXPECT_THROW(pf::layer_cycles(25, 0, 1), xbarprune::InvalidInput);
  const auto p = pf::make_plan({stage(1024, 1)}, {1}, 1);
  EXPECT_NEAR(p.pipeline_time_us, 307.2, 1e-9);
}

TEST(Allocate, SingleGreedyMove) {
  // Cycles [300, 100] with kappa 1; one spare crossbar goes to stage 0.
  const std::vector<pf::StageCost> s{stage(300, 1), stage(100, 1, 0, 1)};
  const pf::SimConfig cfg{1, 1e7};
  const auto p = pf::allocate_replication(s, 3, cfg);
  EXPECT_EQ(p.replication(), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(p.stages[0].cycles, 150u);
  EXPECT_EQ(p.stages[1].cycles, 100u);
  EXPECT_EQ(p.pipeline_cycles, 150u);
}

TEST(Allocate, NoSlackMeansNoReplication) {
  const std::vector<pf::StageCost> s{stage(300, 2, 1), stage(100, 1, 3, 1)};
  const auto p = pf::allocate_replication(s, pf::min_footprint(s));
  EXPECT_EQ(p.replication(), (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(p.xbars_used, 7u);
}

TEST(Allocate, BudgetBelowFootprintReportsShortfall) {
  const std::vector<pf::StageCost> s{stage(10, 4, 2)};
  try {
    pf::allocate_replication(s, 5);
    FAIL() << "expected InvalidInput";
  } catch (const xbarprune::InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos) << e.what();
  }
}

TEST(Allocate, ThreeLayerToyAgainstExhaustiveSearch) {
  const std::vector<pf::StageCost> s{stage(1024, 2), stage(256, 1, 0, 1), stage(64, 1, 0, 2)};
  const auto p = pf::allocate_replication(s, 10);
  const auto best = oracle::best_replication(to_oracle(s), 10, 3);
  EXPECT_LE(p.xbars_used, 10u);
  EXPECT_LE(static_cast<double>(p.pipeline_cycles), 1.5 * static_cast<double>(best.cycles));
  std::cout << "[ toy ] greedy " << p.pipeline_cycles << " optimum " << best.cycles << "\n";
}

TEST(Allocate, PropertiesOnRandomToys) {
  Rng rng(31);
  double worst_gap = 1.0;
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng.below(4);
    std::vector<pf::StageCost> s;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t o = 1 + rng.below(32);
      s.push_back(stage(o * o, 1 + rng.below(3), rng.below(2), i));
    }
    const std::size_t minf = pf::min_footprint(s);
    if (minf > 12) continue;
    const std::size_t budget = minf + rng.below(13 - minf);
    const pf::SimConfig cfg{1 + rng.below(3), 1e7};
    const auto p = pf::allocate_replication(s, budget, cfg);

    ASSERT_LE(p.xbars_used, budget);
    ASSERT_EQ(p.xbars_used, used(s, p.replication()));
    std::size_t mx = 0;
    for (const auto& st : p.stages) mx = std::max(mx, st.cycles);
    ASSERT_EQ(p.pipeline_cycles, mx);

    const auto best = oracle::best_replication(to_oracle(s), budget, cfg.kappa);
    ASSERT_GE(p.pipeline_cycles, best.cycles);
    worst_gap = std::max(worst_gap, static_cast<double>(p.pipeline_cycles) /
                                        static_cast<double>(best.cycles));
  }
  EXPECT_LE(worst_gap, 1.5);
  std::cout << "[ toy ] worst greedy/optimum ratio " << worst_gap << "\n";
}

TEST(Allocate, ReplicatingSlowestStageNeverHurts) {
  Rng rng(32);
  for (int t = 0; t < 300; ++t) {
    std::vector<pf::StageCost> s;
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < 1 + rng.below(5); ++i) {
      s.push_back(stage(1 + rng.below(1024), 1 + rng.below(4), rng.below(3), i));
      r.push_back(1 + rng.below(4));
    }
    const auto before = pf::make_plan(s, r, 1000);
    std::size_t slow = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (before.stages[i].cycles > before.stages[slow].cycles) slow = i;
    ++r[slow];
    EXPECT_LE(pf::make_plan(s, r, 1000).pipeline_cycles, before.pipeline_cycles);
  }
}

TEST(IsoArea, IdenticalModelsGiveOne) {
  Rng rng(33);
  for (int t = 0; t < 100; ++t) {
    std::vector<pf::StageCost> s;
    for (std::size_t i = 0; i < 1 + rng.below(6); ++i)
      s.push_back(stage(1 + rng.below(2048), 1 + rng.below(8), rng.below(8), i));
    const std::size_t b = pf::min_footprint(s) + rng.below(200);
    EXPECT_DOUBLE_EQ(pf::iso_area_speedup(s, s, b), 1.0);
  }
}

TEST(IsoArea, SavingsBecomeReplicasAtUnprunedBudget) {
  const std::vector<pf::StageCost> u{stage(1024, 4, 8), stage(64, 8, 2, 1)};
  const std::vector<pf::StageCost> p{stage(1024, 2, 4), stage(64, 4, 1, 1)};
  const std::size_t b = pf::min_footprint(u);
  EXPECT_EQ(pf::allocate_replication(u, b).replication(), (std::vector<std::size_t>{1, 1}));
  EXPECT_GT(pf::iso_area_speedup(u, p, b), 1.0);
}

TEST(IsoArea, HalvedFootprintSingleDominantStageMatchesOracle) {
  const std::vector<pf::StageCost> u{stage(4096, 4, 2), stage(16, 4, 2, 1)};
  const std::vector<pf::StageCost> p{stage(4096, 2, 1), stage(16, 2, 1, 1)};
  const std::size_t b = 40;
  const double got = pf::iso_area_speedup(u, p, b);
  const double want = static_cast<double>(oracle::best_replication(to_oracle(u), b, 3).cycles) /
                      static_cast<double>(oracle::best_replication(to_oracle(p), b, 3).cycles);
  EXPECT_GE(got, 1.0);
  EXPECT_DOUBLE_EQ(got, want);
}

TEST(IsoPerf, Examples) {
  const std::vector<pf::StageCost> u{stage(1024, 2, 4), stage(256, 2, 2, 1)};
  auto r = pf::iso_perf_xbars(u, u, {1, 1});
  EXPECT_EQ(r.unpruned_xbars, 10u);
  EXPECT_EQ(r.pruned_xbars, 10u);
  EXPECT_DOUBLE_EQ(r.savings, 0.0);

  const std::vector<pf::StageCost> p{stage(1024, 1, 2), stage(256, 1, 1, 1)};
  r = pf::iso_perf_xbars(u, p, {3, 2});
  EXPECT_EQ(r.unpruned_xbars, 3u * 2 + 4 + 2u * 2 + 2);
  EXPECT_EQ(r.pruned_xbars, 3u + 2 + 2u + 1);
  EXPECT_DOUBLE_EQ(r.savings, 1.0 - 8.0 / 16.0);
}

TEST(PlanOutput, CsvAndJson) {
  const std::vector<pf::StageCost> s{stage(16, 1, 1)};
  const auto p = pf::allocate_replication(s, 4);
  std::ostringstream os;
  pf::write_plan_csv(os, p);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "layer,O,windows,W,A,r,cycles,time_us");
  const auto j = pf::plan_to_json(p, 2.5);
  for (const char* k : {"pipeline_time_us", "speedup", "xbars_used", "budget"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_DOUBLE_EQ(j["speedup"].get<double>(), 2.5);
}
