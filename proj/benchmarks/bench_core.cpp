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


// Hot paths: conv forward/backward, crossbar compaction, replication search.

#include <benchmark/benchmark.h>

#include <vector>

#include "xbarprune/nn/ops.hpp"
#include "xbarprune/perf/pipeline.hpp"
#include "xbarprune/rng.hpp"
#include "xbarprune/xbar/crossbar.hpp"

namespace xn = xbarprune::nn;
namespace xb = xbarprune::xbar;
namespace pf = xbarprune::perf;

namespace {

void BM_ConvForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  xn::Model m(xn::Shape3{1, c, 28, 28}, {xn::ConvSpec{c, c, 3, 1, 1}, xn::FlattenSpec{}});
  xn::xavier_init(m, 1);
  xbarprune::Rng rng(2);
  xn::Tensor4 x({32, c, 28, 28});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.normal());
  for (auto _ : state) benchmark::DoNotOptimize(xn::forward(m, x).logits.data());
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ConvForward)->Arg(8)->Arg(32);

void BM_ConvBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  xn::Model m(xn::Shape3{1, c, 28, 28}, {xn::ConvSpec{c, c, 3, 1, 1}, xn::FlattenSpec{}});
  xn::xavier_init(m, 1);
  xbarprune::Rng rng(3);
  xn::Tensor4 x({32, c, 28, 28});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.normal());
  auto fwd = xn::forward(m, x);
  xn::Tensor4 up(fwd.logits.dims(), 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(xn::backward(m, fwd.cache, up).weights.data());
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_ConvBackward)->Arg(8)->Arg(32);

void BM_WeightXbars(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  xbarprune::Rng rng(4);
  xb::LayerMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (rng.uniform() < 0.9) m.prune(r, c);
  const xb::CrossbarConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(xb::weight_xbars(m, cfg));
}
BENCHMARK(BM_WeightXbars)->Arg(300)->Arg(1024);

void BM_AllocateReplication(benchmark::State& state) {
  std::vector<pf::StageCost> stages;
  for (std::size_t i = 0; i < 8; ++i) {
    pf::StageCost s;
    s.layer = i;
    const std::size_t side = 28 >> (i / 2);
    s.windows = side * side;
    s.W = 1 + i % 3;
    s.A = 1;
    stages.push_back(s);
  }
  const auto budget = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pf::allocate_replication(stages, budget).pipeline_cycles);
}
BENCHMARK(BM_AllocateReplication)->Arg(64)->Arg(24576);

}  // namespace

BENCHMARK_MAIN();
