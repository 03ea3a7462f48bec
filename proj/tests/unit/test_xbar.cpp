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

#include <sstream>

#include "oracles.hpp"
#include "xbarprune/errors.hpp"
#include "xbarprune/nn/ops.hpp"
#include "xbarprune/rng.hpp"
#include "xbarprune/xbar/crossbar.hpp"
#include "xbarprune/xbar/footprint.hpp"

namespace xb = xbarprune::xbar;
namespace xn = xbarprune::nn;
using xbarprune::Rng;

namespace {

xb::CrossbarConfig with_size(std::size_t s) {
  xb::CrossbarConfig c;
  c.xbar_size = s;
  return c;
}

xb::LayerMatrix from_bool(const oracle::BoolMatrix& keep, std::size_t cols) {
  xb::LayerMatrix m(keep.size(), cols);
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, keep[r][c] ? 1.0f : 0.0f, keep[r][c]);
  return m;
}

oracle::BoolMatrix random_keep(std::size_t rows, std::size_t cols, double density, Rng& rng) {
  oracle::BoolMatrix k(rows, std::vector<bool>(cols));
  for (auto& row : k)
    for (std::size_t c = 0; c < cols; ++c) row[c] = rng.uniform() < density;
  return k;
}

// Structured random mask: whole rows/columns die with some probability,
// the rest is unstructured. Exercises stage-1 deletion much more often
// than i.i.d. masks do.
oracle::BoolMatrix structured_keep(std::size_t rows, std::size_t cols, Rng& rng) {
  const double row_death = rng.uniform(0.0, 0.6), col_death = rng.uniform(0.0, 0.6);
  const double density = rng.uniform(0.01, 1.0);
  std::vector<bool> rdead(rows), cdead(cols);
  for (std::size_t r = 0; r < rows; ++r) rdead[r] = rng.uniform() < row_death;
  for (std::size_t c = 0; c < cols; ++c) cdead[c] = rng.uniform() < col_death;
  oracle::BoolMatrix k(rows, std::vector<bool>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      k[r][c] = !rdead[r] && !cdead[c] && rng.uniform() < density;
  return k;
}

}  // namespace

TEST(CrossbarConfig, DefaultBudget) {
  xb::CrossbarConfig c;
  EXPECT_EQ(c.xbar_size, 128u);
  EXPECT_EQ(c.total_budget(), 24576u);
}

TEST(LayerToMatrix, ShapesAndIndexFormula) {
  xn::Model m(xn::Shape3{1, 3, 4, 4}, {xn::ConvSpec{3, 64, 3, 1, 1}, xn::FlattenSpec{},
                                      xn::LinearSpec{1024, 10}});
  const auto a = xb::layer_to_matrix(m, 0);
  EXPECT_EQ(a.rows(), 27u);
  EXPECT_EQ(a.cols(), 64u);
  const auto b = xb::layer_to_matrix(m, 2);
  EXPECT_EQ(b.rows(), 1024u);
  EXPECT_EQ(b.cols(), 10u);
  EXPECT_THROW(xb::layer_to_matrix(m, 1), xbarprune::InvalidInput);

  xn::Model c(xn::Shape3{1, 2, 3, 3}, {xn::ConvSpec{2, 3, 2, 1, 0}, xn::FlattenSpec{}});
  xn::xavier_init(c, 17);
  const auto mc = xb::layer_to_matrix(c, 0);
  const auto& w = c.weights()[0];
  std::size_t checked = 0;
  for (std::size_t oc = 0; oc < 3; ++oc)
    for (std::size_t ic = 0; ic < 2; ++ic)
      for (std::size_t ki = 0; ki < 2; ++ki)
        for (std::size_t kj = 0; kj < 2; ++kj, ++checked) {
          EXPECT_EQ(mc.value(ic * 4 + ki * 2 + kj, oc), w(oc, ic, ki, kj));
          EXPECT_EQ(xb::LayerMatrix::row_of(ic, ki, kj, 2), ic * 4 + ki * 2 + kj);
        }
  EXPECT_EQ(checked, 24u);
  EXPECT_EQ(mc.value(xb::LayerMatrix::row_of(1, 0, 1, 2), 2), w(2, 1, 0, 1));
}

TEST(LayerToMatrix, RoundTripIsExact) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const xn::Dims4 d{1 + rng.below(5), 1 + rng.below(4), 1 + rng.below(3), 0};
    const xn::Dims4 wd{d.n, d.c, d.h, d.h};
    xn::Tensor4 w(wd);
    xn::PruneMask mask(wd);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = static_cast<float>(rng.normal());
      if (rng.uniform() < 0.3) {
        mask.prune(i);
        w[i] = 0.0f;
      }
    }
    const auto [w2, m2] = xb::matrix_to_layer(xb::layer_to_matrix(w, mask), wd);
    EXPECT_EQ(w2, w);
    EXPECT_EQ(m2, mask);
  }
}

TEST(SavedRowsCols, PermutationMaskSavesNothing) {
  for (std::size_t n : {4u, 128u}) {
    oracle::BoolMatrix k(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) k[i][(i * 3 + 1) % n] = true;
    const auto m = from_bool(k, n);
    const auto s = xb::saved_rows_cols(m, xb::CrossbarConfig{});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].saved_rows, 0u);
    EXPECT_EQ(s[0].saved_cols, 0u);
    EXPECT_EQ(s[0].saved_cells, 0u);
    EXPECT_EQ(m.kept_count(), n);
  }
  EXPECT_NEAR(1.0 - 128.0 / (128.0 * 128.0), 0.992, 5e-4);
}

TEST(SavedRowsCols, OnePrunedColumn) {
  oracle::BoolMatrix k(4, std::vector<bool>(4, true));
  for (std::size_t r = 0; r < 4; ++r) k[r][2] = false;
  const auto s = xb::saved_rows_cols(from_bool(k, 4), xb::CrossbarConfig{});
  EXPECT_EQ(s[0].saved_cols, 1u);
  EXPECT_EQ(s[0].saved_rows, 0u);
  EXPECT_EQ(s[0].saved_cells, 4u);
  EXPECT_TRUE(xb::saved_rows_cols(xb::LayerMatrix(0, 0), xb::CrossbarConfig{}).empty());
}

TEST(WeightXbars, Examples) {
  const xb::CrossbarConfig cfg;
  EXPECT_EQ(xb::weight_xbars(xb::LayerMatrix(27, 64), cfg), 1u);

  xb::LayerMatrix a(27, 256);
  for (std::size_t c = 64; c < 256; ++c)
    for (std::size_t r = 0; r < 27; ++r) a.prune(r, c);
  EXPECT_EQ(xb::compact(a, 128).live_cols, 64u);
  EXPECT_EQ(xb::weight_xbars(a, cfg), 1u);
  EXPECT_EQ(xb::unpruned_weight_xbars(27, 256, cfg), 2u);

  xb::LayerMatrix b(256, 256);
  for (std::size_t r = 0; r < 256; ++r)
    for (std::size_t c = 0; c < 256; ++c)
      if ((r < 128) != (c < 128)) b.prune(r, c);
  const auto cb = xb::compact(b, 128);
  EXPECT_EQ(cb.band_segments, (std::vector<std::size_t>{128, 128}));
  EXPECT_EQ(cb.xbars, 2u);
  EXPECT_EQ(xb::unpruned_weight_xbars(256, 256, cfg), 4u);
}

TEST(WeightXbars, UnprunedReducesToTileCount) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const std::size_t r = 1 + rng.below(400), c = 1 + rng.below(400), s = 1 + rng.below(130);
    EXPECT_EQ(xb::weight_xbars(xb::LayerMatrix(r, c), with_size(s)),
              oracle::ceil_div(r, s) * oracle::ceil_div(c, s));
  }
}

TEST(WeightXbars, MatchesBruteForceOracle) {
  Rng rng(99);
  for (int t = 0; t < 300; ++t) {
    const std::size_t rows = 1 + rng.below(300), cols = 1 + rng.below(300);
    const std::size_t S = rng.below(2) ? 128 : 8 + rng.below(64);
    const auto keep = t % 2 ? random_keep(rows, cols, rng.uniform(0.01, 1.0), rng)
                            : structured_keep(rows, cols, rng);
    const auto m = from_bool(keep, cols);
    ASSERT_EQ(xb::weight_xbars(m, with_size(S)), oracle::weight_xbars(keep, cols, S))
        << rows << "x" << cols << " S=" << S;
    ASSERT_EQ(xb::total_saved_cells(xb::saved_rows_cols(m, with_size(S))),
              oracle::saved_cells(keep, cols, S));
  }
}

TEST(SavedRowsCols, InclusionExclusionAndBounds) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t rows = 1 + rng.below(200), cols = 1 + rng.below(200), S = 4 + rng.below(60);
    const auto m = from_bool(structured_keep(rows, cols, rng), cols);
    for (const auto& s : xb::saved_rows_cols(m, with_size(S))) {
      EXPECT_LE(s.tile_rows, S);
      EXPECT_LE(s.tile_cols, S);
      EXPECT_LE(s.saved_rows, s.tile_rows);
      EXPECT_LE(s.saved_cols, s.tile_cols);
      EXPECT_EQ(s.saved_cells, s.saved_rows * s.tile_cols + s.saved_cols * s.tile_rows -
                                   s.saved_rows * s.saved_cols);
      EXPECT_LE(s.saved_cells, s.tile_rows * s.tile_cols);
    }
  }
}

TEST(WeightXbars, MonotoneUnderExtraPruning) {
  Rng rng(6);
  for (int t = 0; t < 60; ++t) {
    const std::size_t rows = 1 + rng.below(150), cols = 1 + rng.below(150), S = 4 + rng.below(40);
    auto keep = structured_keep(rows, cols, rng);
    auto m = from_bool(keep, cols);
    std::size_t x = xb::weight_xbars(m, with_size(S));
    std::size_t cells = xb::total_saved_cells(xb::saved_rows_cols(m, with_size(S)));
    for (int step = 0; step < 10; ++step) {
      for (std::size_t k = 0; k < 1 + rows * cols / 10; ++k) m.prune(rng.below(rows), rng.below(cols));
      const std::size_t x2 = xb::weight_xbars(m, with_size(S));
      const std::size_t c2 = xb::total_saved_cells(xb::saved_rows_cols(m, with_size(S)));
      EXPECT_LE(x2, x);
      EXPECT_GE(c2, cells);
      x = x2;
      cells = c2;
    }
  }
}

TEST(SavedRowsCols, FilterPruningIsExact) {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    const std::size_t rows = 1 + rng.below(128), cols = 2 + rng.below(127);
    xb::LayerMatrix m(rows, cols);
    const std::size_t kill = rng.below(cols);
    for (std::size_t c = 0; c < kill; ++c)
      for (std::size_t r = 0; r < rows; ++r) m.prune(r, c);
    const auto s = xb::saved_rows_cols(m, xb::CrossbarConfig{});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].saved_cols, kill);
    EXPECT_EQ(xb::compact(m, 128).live_cols, cols - kill);
  }
}

TEST(ActivationCells, Examples) {
  const xb::CrossbarConfig cfg;
  auto a = xb::activation_cells(64, 32 * 32, 1, cfg);
  EXPECT_EQ(a.cells, 65536u);
  EXPECT_EQ(a.xbars, 4u);
  a = xb::activation_cells(32, 32 * 32, 1, cfg);
  EXPECT_EQ(a.cells, 32768u);
  EXPECT_EQ(a.xbars, 2u);
  EXPECT_EQ(xb::activation_cells(64, 1024, 3, cfg).cells, 3u * 65536u);
}

TEST(ActivationCells, ChannelPruningLeavesActivationsAlone) {
  xn::Model m(xn::Shape3{1, 4, 8, 8}, {xn::ConvSpec{4, 8, 3, 1, 1}, xn::FlattenSpec{},
                                      xn::LinearSpec{512, 2}});
  const auto before = xb::activation_cells(m, 0, xb::CrossbarConfig{}, 1);
  // Drop input channel 1 of every filter: no filter vanishes.
  for (std::size_t oc = 0; oc < 8; ++oc)
    for (std::size_t j = 0; j < 9; ++j) m.masks()[0].prune((oc * 4 + 1) * 9 + j);
  const auto after = xb::activation_cells(m, 0, xb::CrossbarConfig{}, 1);
  EXPECT_EQ(after.cells, before.cells);
  EXPECT_EQ(before.cells, 8u * 64u);
}

TEST(Footprint, UnprunedHasZeroSavings) {
  xn::Model m(xn::Shape3{1, 3, 8, 8}, {xn::ConvSpec{3, 16, 3, 1, 1}, xn::ReluSpec{},
                                      xn::MaxPoolSpec{2, 2}, xn::FlattenSpec{},
                                      xn::LinearSpec{256, 10}});
  const auto fp = xb::model_footprint(m, xb::CrossbarConfig{});
  EXPECT_EQ(fp.layers.size(), 2u);
  EXPECT_DOUBLE_EQ(fp.savings_fraction(), 0.0);
  EXPECT_EQ(fp.weight_xbars_unpruned(), 1u + 2u);
  EXPECT_FALSE(fp.exceeds_chip_budget());
  EXPECT_THROW(xb::model_footprint(m, xb::CrossbarConfig{}, 0), xbarprune::InvalidInput);
}

TEST(Footprint, EverySecondFilterPruned) {
  // Single-crossbar layers; pruning every second filter halves the
  // activation cells while weights stay on one crossbar per layer.
  xn::Model m(xn::Shape3{1, 2, 16, 16}, {xn::ConvSpec{2, 8, 3, 1, 1}, xn::ReluSpec{},
                                        xn::ConvSpec{8, 8, 3, 1, 1}, xn::FlattenSpec{},
                                        xn::LinearSpec{2048, 4}});
  const auto before = xb::model_footprint(m, with_size(128));
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& d = m.masks()[t].dims();
    const std::size_t per = d.c * d.h * d.w;
    for (std::size_t oc = 1; oc < d.n; oc += 2)
      for (std::size_t j = 0; j < per; ++j) m.masks()[t].prune(oc * per + j);
  }
  const auto after = xb::model_footprint(m, with_size(128));
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_EQ(before.layers[l].weight_xbars_unpruned, 1u);
    EXPECT_EQ(after.layers[l].weight_xbars_pruned, 1u);
    EXPECT_EQ(after.layers[l].act_cells_pruned * 2, before.layers[l].act_cells_pruned);
  }
}

TEST(Footprint, FullyPrunedLayerIsDegenerate) {
  xn::Model m(xn::Shape3{1, 1, 4, 4}, {xn::FlattenSpec{}, xn::LinearSpec{16, 2}});
  for (std::size_t i = 0; i < 32; ++i) m.masks()[0].prune(i);
  EXPECT_THROW(xb::model_footprint(m, xb::CrossbarConfig{}), xbarprune::DegenerateModel);
}

TEST(Footprint, CsvHeaderAndJsonTotals) {
  xn::Model m(xn::Shape3{1, 1, 4, 4}, {xn::ConvSpec{1, 2, 3, 1, 1}, xn::FlattenSpec{},
                                      xn::LinearSpec{32, 2}});
  const auto fp = xb::model_footprint(m, xb::CrossbarConfig{});
  std::ostringstream os;
  xb::write_footprint_csv(os, fp);
  const std::string text = os.str();
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(header,
            "layer,rows,cols,live_rows,live_cols,xbars_unpruned,xbars_pruned,"
            "act_cells_unpruned,act_cells_pruned");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  const auto j = xb::footprint_to_json(fp);
  EXPECT_TRUE(j.is_object());
}
