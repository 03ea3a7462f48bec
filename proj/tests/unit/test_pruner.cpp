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

#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "xbarprune/errors.hpp"
#include "xbarprune/harness/dataset.hpp"
#include "xbarprune/nn/ops.hpp"
#include "xbarprune/nn/serialize.hpp"
#include "xbarprune/pruner/checkpoint.hpp"
#include "xbarprune/pruner/groups.hpp"
#include "xbarprune/pruner/prune.hpp"
#include "xbarprune/rng.hpp"
#include "xbarprune/xbar/crossbar.hpp"

namespace xn = xbarprune::nn;
namespace xp = xbarprune::pruner;
namespace xb = xbarprune::xbar;
using xbarprune::Rng;
using xp::Granularity;

namespace {

using Key = std::pair<std::size_t, std::size_t>;

// Mean |w| per group of one conv weight tensor, enumerated straight from
// (oc, ic, ki, kj) coordinates.
std::map<Key, double> brute_scores(const xn::Model& m, const Granularity& g, std::size_t S) {
  std::map<Key, std::pair<double, std::size_t>> acc;
  for (std::size_t t = 0; t < m.num_trainable(); ++t) {
    const auto& w = m.weights()[t];
    const auto& d = w.dims();
    const std::size_t bands = (d.n + S - 1) / S;
    for (std::size_t oc = 0; oc < d.n; ++oc)
      for (std::size_t ic = 0; ic < d.c; ++ic)
        for (std::size_t ki = 0; ki < d.h; ++ki)
          for (std::size_t kj = 0; kj < d.w; ++kj) {
            const std::size_t flat = w.offset(oc, ic, ki, kj);
            if (!m.masks()[t].kept(flat)) continue;
            const std::size_t row = (ic * d.h + ki) * d.w + kj;
            std::size_t idx = 0;
            switch (g.kind) {
              case xp::GranularityKind::Filter:
              case xp::GranularityKind::ColumnGroup: idx = oc; break;
              case xp::GranularityKind::Channel: idx = oc * d.c + ic; break;
              case xp::GranularityKind::Index: idx = row * bands + oc / S; break;
              case xp::GranularityKind::Unstructured: idx = flat; break;
              case xp::GranularityKind::BlockGroup:
                idx = (row / g.bh) * ((d.n + g.bw - 1) / g.bw) + oc / g.bw;
                break;
            }
            auto& [sum, n] = acc[{t, idx}];
            sum += std::abs(static_cast<double>(w[flat]));
            ++n;
          }
  }
  std::map<Key, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / static_cast<double>(v.second);
  return out;
}

std::map<Key, double> lib_scores(const xn::Model& m, const Granularity& g, std::size_t S) {
  std::map<Key, double> out;
  for (const auto& grp : xp::group_scores(m, g, S)) out[{grp.slot, grp.index}] = grp.score;
  return out;
}

std::vector<std::set<std::size_t>> member_sets(const xn::Model& m, const Granularity& g) {
  std::vector<std::set<std::size_t>> out;
  for (const auto& grp : xp::enumerate_groups(m, g))
    out.emplace_back(grp.members.begin(), grp.members.end());
  return out;
}

xn::Model random_conv(Rng& rng, std::size_t ic, std::size_t oc, std::size_t k) {
  xn::Model m(xn::Shape3{1, ic, 4, 4}, {xn::ConvSpec{ic, oc, k, 1, k / 2}, xn::FlattenSpec{}});
  for (auto& v : m.weights()[0].values()) v = static_cast<float>(rng.normal());
  return m;
}

const std::vector<Granularity>& all_granularities() {
  static const std::vector<Granularity> g{
      Granularity::filter(),       Granularity::channel(),      Granularity::index(),
      Granularity::unstructured(), Granularity::column_group(), Granularity::block_group(2, 3)};
  return g;
}

}  // namespace

TEST(Granularity, NamesRoundTrip) {
  for (const auto& g : all_granularities()) EXPECT_EQ(Granularity::parse(g.name()), g);
  EXPECT_EQ(Granularity::block_group(4, 8).name(), "block(4x8)");
  EXPECT_THROW(Granularity::parse("rows"), xbarprune::InvalidInput);
}

TEST(GroupScores, TwoFiltersOfConstantMagnitude) {
  xn::Model m(xn::Shape3{1, 1, 1, 3}, {xn::FlattenSpec{}, xn::LinearSpec{3, 2}});
  for (std::size_t i = 0; i < 3; ++i) {
    m.weights()[0][i] = 0.1f;
    m.weights()[0][3 + i] = -0.5f;
  }
  const auto g = xp::group_scores(m, Granularity::filter());
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g[0].score, 0.1, 1e-7);
  EXPECT_NEAR(g[1].score, 0.5, 1e-7);
}

TEST(GroupScores, MeanOfMagnitudes) {
  xn::Model m(xn::Shape3{1, 1, 1, 2}, {xn::FlattenSpec{}, xn::LinearSpec{2, 1}});
  m.weights()[0][0] = -0.3f;
  m.weights()[0][1] = 0.1f;
  EXPECT_NEAR(xp::group_scores(m, Granularity::filter())[0].score, 0.2, 1e-7);
}

TEST(GroupScores, MatchBruteForceForEveryGranularity) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    auto m = random_conv(rng, 1 + rng.below(3), 3 + rng.below(6), 1 + 2 * rng.below(2));
    for (std::size_t i = 0; i < m.masks()[0].size(); ++i)
      if (rng.uniform() < 0.3) m.masks()[0].prune(i);
    m.apply_masks();
    const std::size_t S = 2 + rng.below(3);  // several column bands
    for (const auto& g : all_granularities()) {
      const auto want = brute_scores(m, g, S);
      const auto got = lib_scores(m, g, S);
      ASSERT_EQ(got.size(), want.size()) << g.name();
      for (const auto& [k, v] : want) EXPECT_NEAR(got.at(k), v, 1e-6) << g.name();
    }
  }
}

TEST(GroupScores, DegenerateWhenNothingKept) {
  xn::Model m(xn::Shape3{1, 1, 1, 2}, {xn::FlattenSpec{}, xn::LinearSpec{2, 1}});
  m.masks()[0].prune(0);
  m.masks()[0].prune(1);
  EXPECT_THROW(xp::group_scores(m, Granularity::filter()), xbarprune::DegenerateModel);
}

TEST(Groups, BlockTwoByTwoOnFourByFour) {
  xn::Model m(xn::Shape3{1, 1, 1, 4}, {xn::FlattenSpec{}, xn::LinearSpec{4, 4}});
  const auto g = xp::enumerate_groups(m, Granularity::block_group(2, 2));
  ASSERT_EQ(g.size(), 4u);
  for (const auto& grp : g) EXPECT_EQ(grp.members.size(), 4u);
}

TEST(Groups, ColumnGroupEqualsFilter) {
  Rng rng(2);
  auto m = random_conv(rng, 3, 5, 3);
  EXPECT_EQ(member_sets(m, Granularity::column_group()), member_sets(m, Granularity::filter()));
}

TEST(Groups, FullWidthSingleRowBlockEqualsIndexOnOneBand) {
  // A block one matrix row tall and one crossbar wide is an index group
  // when the layer has a single column band.
  Rng rng(3);
  auto m = random_conv(rng, 2, 40, 3);
  EXPECT_EQ(member_sets(m, Granularity::block_group(1, 128)), member_sets(m, Granularity::index()));
}

TEST(Groups, PartitionEveryWeight) {
  Rng rng(4);
  auto m = random_conv(rng, 3, 7, 3);
  for (const auto& g : all_granularities()) {
    std::vector<int> seen(m.weights()[0].size(), 0);
    for (const auto& grp : xp::enumerate_groups(m, g, 4))
      for (std::size_t i : grp.members) ++seen[i];
    for (int s : seen) EXPECT_EQ(s, 1) << g.name();
  }
}

TEST(PruneStep, EightUniformFiltersQuarter) {
  xn::Model m(xn::Shape3{1, 1, 1, 4}, {xn::FlattenSpec{}, xn::LinearSpec{4, 8}});
  for (std::size_t oc = 0; oc < 8; ++oc)
    for (std::size_t i = 0; i < 4; ++i)
      m.weights()[0][oc * 4 + i] = static_cast<float>(0.1 * static_cast<double>((oc * 5) % 8 + 1));
  auto st = xp::PruneState::archive(m);
  const auto r = xp::prune_step(st, m, 0.25, Granularity::filter());
  EXPECT_EQ(r.groups_pruned, 2u);
  EXPECT_EQ(r.weights_pruned, 8u);
  // The two smallest filters have scores 0.1 (oc 0) and 0.2 (oc 5).
  for (std::size_t oc = 0; oc < 8; ++oc) {
    const bool gone = oc == 0 || oc == 5;
    EXPECT_EQ(m.masks()[0].kept(oc * 4), !gone) << oc;
  }
}

TEST(PruneStep, OvershootGuardLeavesShortfall) {
  // Kept sizes {10, 10, 100}, scores {0.1, 0.2, 0.9}: the target is 30.
  xn::Model m(xn::Shape3{1, 1, 1, 100}, {xn::FlattenSpec{}, xn::LinearSpec{100, 3}});
  const float s[3] = {0.1f, 0.2f, 0.9f};
  for (std::size_t oc = 0; oc < 3; ++oc)
    for (std::size_t i = 0; i < 100; ++i) {
      m.weights()[0][oc * 100 + i] = s[oc];
      if (oc < 2 && i >= 10) m.masks()[0].prune(oc * 100 + i);
    }
  m.apply_masks();
  auto st = xp::PruneState::archive(m);
  const auto r = xp::prune_step(st, m, 0.25, Granularity::filter());
  EXPECT_EQ(r.groups_pruned, 2u);
  EXPECT_EQ(r.weights_pruned, 20u);
  EXPECT_DOUBLE_EQ(r.target, 30.0);
  EXPECT_DOUBLE_EQ(r.shortfall, 10.0);
  EXPECT_EQ(m.kept_weights(), 100u);
}

TEST(PruneStep, TiesBreakByLayerThenIndex) {
  xn::Model m(xn::Shape3{1, 1, 1, 2},
              {xn::FlattenSpec{}, xn::LinearSpec{2, 2}, xn::LinearSpec{2, 2}});
  for (auto& w : m.weights())
    for (auto& v : w.values()) v = 0.5f;
  auto st = xp::PruneState::archive(m);
  xp::prune_step(st, m, 0.25, Granularity::unstructured());
  EXPECT_FALSE(m.masks()[0].kept(0));
  EXPECT_FALSE(m.masks()[0].kept(1));
  EXPECT_TRUE(m.masks()[0].kept(2));
  EXPECT_EQ(m.masks()[1].kept_count(), 4u);
}

TEST(PruneStep, NeverEmptiesALayer) {
  // Layer 0 holds one tiny filter; layer 1 four larger ones. The tiny filter
  // ranks first but is its layer's last live group, so it is skipped, as is
  // the last filter of layer 1.
  xn::Model m(xn::Shape3{1, 1, 1, 4},
              {xn::FlattenSpec{}, xn::LinearSpec{4, 1}, xn::LinearSpec{1, 4}});
  for (auto& v : m.weights()[0].values()) v = 0.01f;
  for (std::size_t oc = 0; oc < 4; ++oc) m.weights()[1][oc] = 0.1f * static_cast<float>(oc + 1);
  auto st = xp::PruneState::archive(m);
  const auto r = xp::prune_step(st, m, 0.5, Granularity::filter());
  EXPECT_EQ(m.masks()[0].kept_count(), 4u);
  EXPECT_EQ(r.weights_pruned, 3u);
  EXPECT_EQ(m.masks()[1].kept_count(), 1u);
  EXPECT_TRUE(m.masks()[1].kept(3));
  for (int n = 0; n < 6; ++n) xp::prune_step(st, m, 0.5, Granularity::filter());
  for (const auto& mask : m.masks()) EXPECT_GT(mask.kept_count(), 0u);
}

TEST(PruneStep, RejectsBadFraction) {
  xn::Model m(xn::Shape3{1, 1, 1, 2}, {xn::FlattenSpec{}, xn::LinearSpec{2, 2}});
  auto st = xp::PruneState::archive(m);
  EXPECT_THROW(xp::prune_step(st, m, 0.0, Granularity::filter()), xbarprune::InvalidInput);
  EXPECT_THROW(xp::prune_step(st, m, 1.0, Granularity::filter()), xbarprune::InvalidInput);
}

TEST(PruneStep, GeometricDecayOfUniformGroups) {
  Rng rng(9);
  xn::Model m(xn::Shape3{1, 1, 1, 64}, {xn::FlattenSpec{}, xn::LinearSpec{64, 64}});
  for (auto& v : m.weights()[0].values()) v = static_cast<float>(rng.normal());
  auto st = xp::PruneState::archive(m);
  const double total = 4096.0;
  for (int n = 1; n <= 8; ++n) {
    xp::prune_step(st, m, 0.25, Granularity::unstructured());
    EXPECT_NEAR(static_cast<double>(m.kept_weights()), total * std::pow(0.75, n), n)
        << "step " << n;
  }
}

TEST(Rewind, RestoresInitialWeightsAndIsIdempotent) {
  Rng rng(10);
  auto m = random_conv(rng, 2, 4, 3);
  const auto untouched = m;
  auto st = xp::PruneState::archive(m);
  xp::rewind(st, m);
  EXPECT_EQ(m.weights(), untouched.weights());

  for (auto& v : m.weights()[0].values()) v += 1.0f;  // stands in for training
  xp::prune_step(st, m, 0.25, Granularity::channel());
  xp::rewind(st, m);
  for (std::size_t i = 0; i < m.weights()[0].size(); ++i) {
    EXPECT_EQ(m.weights()[0][i], m.masks()[0].kept(i) ? st.w_initial[0][i] : 0.0f);
  }
  const auto once = m;
  xp::rewind(st, m);
  EXPECT_EQ(m.weights(), once.weights());

  xp::PruneState empty;
  EXPECT_THROW(xp::rewind(empty, m), xbarprune::InvalidInput);
}

TEST(Undo, RoundTripIsByteIdentical) {
  Rng rng(11);
  auto m = random_conv(rng, 2, 6, 3);
  auto st = xp::PruneState::archive(m);
  const std::string before = xn::serialize_state(m);
  const double sparsity_before = m.sparsity();
  xp::prune_step(st, m, 0.25, Granularity::filter());
  const double after_step = m.sparsity();
  xp::undo_last(st, m);
  EXPECT_EQ(xn::serialize_state(m), before);
  EXPECT_LT(m.sparsity(), after_step);
  EXPECT_EQ(m.sparsity(), sparsity_before);
  EXPECT_THROW(xp::undo_last(st, m), xbarprune::InvalidInput);
}

TEST(Undo, FirstIterationHasNothingToUndo) {
  Rng rng(12);
  auto m = random_conv(rng, 1, 2, 1);
  auto st = xp::PruneState::archive(m);
  EXPECT_THROW(xp::undo_last(st, m), xbarprune::InvalidInput);
}

TEST(Savings, StructuredDominatesUnstructured) {
  // One 72 x 32 crossbar: conv ic=8, k=3, oc=32.
  const std::size_t oc = 32, rows = 72;
  const std::size_t killed = 8;
  const double s = static_cast<double>(killed) / oc;

  xn::Model f(xn::Shape3{1, 8, 4, 4}, {xn::ConvSpec{8, oc, 3, 1, 1}, xn::FlattenSpec{}});
  for (std::size_t c = 0; c < killed; ++c)
    for (std::size_t r = 0; r < rows; ++r) f.masks()[0].prune(c * rows + r);
  const auto sf = xb::saved_rows_cols(xb::layer_to_matrix(f, 0), xb::CrossbarConfig{});
  ASSERT_EQ(sf.size(), 1u);
  EXPECT_DOUBLE_EQ(static_cast<double>(sf[0].saved_cols) / oc, s);

  Rng rng(13);
  double mean = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    xn::Model u(xn::Shape3{1, 8, 4, 4}, {xn::ConvSpec{8, oc, 3, 1, 1}, xn::FlattenSpec{}});
    std::vector<std::size_t> idx(oc * rows);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < killed * rows; ++i) u.masks()[0].prune(idx[i]);
    const auto su = xb::saved_rows_cols(xb::layer_to_matrix(u, 0), xb::CrossbarConfig{});
    mean += static_cast<double>(su[0].saved_cols) / oc / trials;
  }
  EXPECT_LT(mean, s);
}

namespace {

struct Blobs {
  xn::Dataset train, test;
};

// Noise 0.5 keeps the four classes linearly separable.
Blobs blobs() {
  return {xbarprune::harness::make_blobs(256, 4, 8, 0.5, 7, 1),
          xbarprune::harness::make_blobs(128, 4, 8, 0.5, 7, 2)};
}

xn::Model blob_net(std::uint64_t seed) {
  xn::Model m(xn::Shape3{1, 1, 8, 8},
              {xn::ConvSpec{1, 16, 3, 1, 1}, xn::ReluSpec{}, xn::MaxPoolSpec{2, 2},
               xn::ConvSpec{16, 16, 3, 1, 1}, xn::ReluSpec{}, xn::MaxPoolSpec{2, 2},
               xn::FlattenSpec{}, xn::LinearSpec{64, 4}});
  xn::xavier_init(m, seed);
  return m;
}

xp::PruneConfig quick(double slack, std::size_t iters) {
  xp::PruneConfig c;
  c.epochs = 2;
  c.max_iter = iters;
  c.acc_slack = slack;
  c.train.batch_size = 16;
  return c;
}

}  // namespace

TEST(Loop, ChecksDisabledFollowsGeometricLaw) {
  const auto d = blobs();
  const auto r = xp::run_realprune(blob_net(1), d.train, d.test, quick(1.0, 3));
  EXPECT_EQ(r.history.size(), 3u);
  EXPECT_EQ(r.stop_reason, "max_iter");
  EXPECT_NEAR(1.0 - r.model.sparsity(), 0.421875, 0.05);
  EXPECT_TRUE(r.model.masks_respected());
}

TEST(Loop, ZeroIterationsReturnsUnprunedInitialModel) {
  const auto d = blobs();
  const auto init = blob_net(2);
  const auto r = xp::run_realprune(init, d.train, d.test, quick(0.002, 0));
  EXPECT_EQ(r.model.sparsity(), 0.0);
  EXPECT_EQ(r.model.weights(), init.weights());
  EXPECT_DOUBLE_EQ(r.accuracy, r.baseline_accuracy);
}

TEST(Loop, LtpTwoIterationsKeepsNineSixteenths) {
  const auto d = blobs();
  const auto init = blob_net(3);
  const auto r = xp::run_ltp(init, d.train, d.test, quick(1.0, 2));
  const double total = static_cast<double>(r.model.total_weights());
  EXPECT_NEAR(static_cast<double>(r.model.kept_weights()), 0.5625 * total, 1.0);
  const auto again = xp::run_ltp(init, d.train, d.test, quick(1.0, 2));
  EXPECT_EQ(again.model.masks(), r.model.masks());
}

TEST(Loop, SeparableDataPrunesDeeplyWithinSlack) {
  const auto d = blobs();
  auto cfg = quick(0.002, 30);
  cfg.epochs = 3;
  const auto r = xp::run_realprune(blob_net(4), d.train, d.test, cfg);
  EXPECT_GE(r.model.sparsity(), 0.8) << r.stop_reason;
  EXPECT_GE(r.accuracy, r.baseline_accuracy - cfg.acc_slack);
  // Gate soundness and granularity monotonicity over the whole history.
  std::size_t gi = 0;
  const std::vector<Granularity> order{Granularity::filter(), Granularity::channel(),
                                       Granularity::index()};
  for (const auto& rec : r.history) {
    if (rec.accepted) {
      EXPECT_GE(rec.accuracy, r.baseline_accuracy - cfg.acc_slack);
    }
    while (gi < order.size() && !(order[gi] == rec.granularity)) ++gi;
    ASSERT_LT(gi, order.size()) << "granularity went backwards";
  }
}

TEST(Loop, ObserverSeesMasksRespectedEverywhere) {
  const auto d = blobs();
  std::size_t events = 0, steps = 0;
  xp::LoopObserver obs;
  obs.on_event = [&](xp::LoopEvent e, const xn::Model& m, const xp::PruneState& st) {
    ++events;
    EXPECT_TRUE(m.masks_respected()) << xp::loop_event_name(e);
    if (e == xp::LoopEvent::Rewound) {
      for (std::size_t t = 0; t < m.num_trainable(); ++t)
        for (std::size_t i = 0; i < m.weights()[t].size(); ++i)
          if (m.masks()[t].kept(i)) {
            ASSERT_EQ(m.weights()[t][i], st.w_initial[t][i]);
          }
    }
  };
  obs.after_step = [&](const xn::Model& m, std::size_t, std::size_t) {
    ++steps;
    ASSERT_TRUE(m.masks_respected());
  };
  xp::run_realprune(blob_net(5), d.train, d.test, quick(0.0, 3), obs);
  EXPECT_GT(events, 3u);
  EXPECT_GT(steps, 0u);
}

TEST(Loop, GroupBaselineRejectsRealpruneGranularities) {
  const auto d = blobs();
  EXPECT_THROW(xp::run_group_baseline(blob_net(6), d.train, d.test, quick(1.0, 1),
                                      Granularity::filter()),
               xbarprune::InvalidInput);
  const auto r = xp::run_group_baseline(blob_net(6), d.train, d.test, quick(1.0, 1),
                                        Granularity::block_group(4, 4));
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_GT(r.model.sparsity(), 0.0);
}

TEST(GroupLasso, AddsNormalizedWeights) {
  xn::Model m(xn::Shape3{1, 1, 1, 2}, {xn::FlattenSpec{}, xn::LinearSpec{2, 2}});
  m.weights()[0][0] = 3.0f;
  m.weights()[0][1] = 4.0f;  // filter 0, norm 5; filter 1 is all zero
  const auto hook = xp::make_group_lasso_hook(m, Granularity::filter(), 0.5);
  xn::Gradients<float> g;
  g.weights.emplace_back(m.weights()[0].dims());
  hook(m, g);
  EXPECT_FLOAT_EQ(g.weights[0][0], 0.5f * 3.0f / 5.0f);
  EXPECT_FLOAT_EQ(g.weights[0][1], 0.5f * 4.0f / 5.0f);
  EXPECT_EQ(g.weights[0][2], 0.0f);
  EXPECT_EQ(g.weights[0][3], 0.0f);
}

TEST(Checkpoint, RoundTripAndRebuild) {
  const auto d = blobs();
  const auto r = xp::run_realprune(blob_net(8), d.train, d.test, quick(1.0, 2));
  const auto ck = xp::make_checkpoint(r, 8, "realprune");
  const auto back = xp::checkpoint_from_json(xp::checkpoint_to_json(ck));
  EXPECT_EQ(back.masks, ck.masks);
  EXPECT_EQ(back.accuracy_log, ck.accuracy_log);
  EXPECT_EQ(back.granularity_history, ck.granularity_history);
  EXPECT_EQ(xp::checkpoint_to_json(back).dump(), xp::checkpoint_to_json(ck).dump());
  const auto rebuilt = xp::model_from_checkpoint(back);
  EXPECT_EQ(rebuilt.masks(), r.model.masks());
  EXPECT_EQ(rebuilt.weights(), r.model.weights());

  auto j = xp::checkpoint_to_json(ck);
  j["model_hash"] = "0000000000000000";
  EXPECT_THROW(xp::checkpoint_from_json(j), xbarprune::InvalidInput);
  j = xp::checkpoint_to_json(ck);
  j["version"] = 2;
  EXPECT_THROW(xp::checkpoint_from_json(j), xbarprune::InvalidInput);
}
