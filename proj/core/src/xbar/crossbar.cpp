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

#include "xbarprune/xbar/crossbar.hpp"

#include <algorithm>

#include "xbarprune/errors.hpp"

namespace xbarprune::xbar {

namespace {

std::size_t ceil_div(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::size_t>((a + b - 1) / b);
}

void check_size(const CrossbarConfig& cfg) {
  if (cfg.xbar_size == 0) throw InvalidInput("crossbar size must be positive");
}

}  // namespace

std::size_t LayerMatrix::kept_count() const {
  return static_cast<std::size_t>(
      std::count_if(keep_.begin(), keep_.end(), [](auto b) { return b != 0; }));
}

LayerMatrix layer_to_matrix(const nn::Tensor4& weights, const nn::PruneMask& mask) {
  const nn::Dims4& d = weights.dims();
  if (!(mask.dims() == d)) {
    throw InvalidInput("mask dims " + mask.dims().str() + " differ from weights " +
                       d.str());
  }
  const std::size_t rows = d.c * d.h * d.w;
  const std::size_t cols = d.n;
  LayerMatrix m(rows, cols);
  // weight flat index = oc * rows + row_of(ic, ki, kj)
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = c * rows + r;
      m.set(r, c, weights[i], mask.kept(i));
    }
  }
  return m;
}

LayerMatrix layer_to_matrix(const nn::Model& model, std::size_t layer) {
  if (layer >= model.layers().size()) {
    throw InvalidInput("layer index " + std::to_string(layer) + " out of range");
  }
  const auto slot = model.trainable_slot(layer);
  if (!slot) {
    throw InvalidInput("layer " + std::to_string(layer) + " (" +
                       nn::layer_kind_name(model.layers()[layer]) +
                       ") has no weights to map");
  }
  return layer_to_matrix(model.weights()[*slot], model.masks()[*slot]);
}

std::pair<nn::Tensor4, nn::PruneMask> matrix_to_layer(const LayerMatrix& m,
                                                      nn::Dims4 weight_dims) {
  if (weight_dims.n != m.cols() || weight_dims.c * weight_dims.h * weight_dims.w != m.rows()) {
    throw InvalidInput("weight dims " + weight_dims.str() +
                       " do not match a " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " matrix");
  }
  nn::Tensor4 w(weight_dims);
  nn::PruneMask mask(weight_dims, true);
  const std::size_t rows = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      w[c * rows + r] = m.value(r, c);
      mask.set(c * rows + r, m.kept(r, c));
    }
  }
  return {std::move(w), std::move(mask)};
}

std::vector<CrossbarSavings> saved_rows_cols(const LayerMatrix& m,
                                             const CrossbarConfig& cfg) {
  check_size(cfg);
  const TileGrid grid{m.rows(), m.cols(), cfg.xbar_size};
  std::vector<CrossbarSavings> out;
  out.reserve(grid.row_bands() * grid.col_bands());
  for (std::size_t a = 0; a < grid.row_bands(); ++a) {
    for (std::size_t b = 0; b < grid.col_bands(); ++b) {
      CrossbarSavings s;
      s.band_row = a;
      s.band_col = b;
      const std::size_t r0 = grid.row_begin(a), r1 = grid.row_end(a);
      const std::size_t c0 = grid.col_begin(b), c1 = grid.col_end(b);
      s.tile_rows = r1 - r0;
      s.tile_cols = c1 - c0;
      std::vector<std::uint8_t> col_live(s.tile_cols, 0);
      for (std::size_t r = r0; r < r1; ++r) {
        bool row_live = false;
        for (std::size_t c = c0; c < c1; ++c) {
          if (m.kept(r, c)) {
            row_live = true;
            col_live[c - c0] = 1;
          }
        }
        if (!row_live) ++s.saved_rows;
      }
      s.saved_cols = static_cast<std::size_t>(
          std::count(col_live.begin(), col_live.end(), std::uint8_t{0}));
      s.saved_cells = s.saved_rows * s.tile_cols + s.saved_cols * s.tile_rows -
                      s.saved_rows * s.saved_cols;
      out.push_back(s);
    }
  }
  return out;
}

std::size_t total_saved_cells(const std::vector<CrossbarSavings>& tiles) {
  std::size_t n = 0;
  for (const auto& t : tiles) n += t.saved_cells;
  return n;
}

Compaction compact(const LayerMatrix& m, std::size_t xbar_size) {
  if (xbar_size == 0) throw InvalidInput("crossbar size must be positive");
  std::vector<std::size_t> live_rows;
  std::vector<std::uint8_t> col_live(m.cols(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    bool any = false;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.kept(r, c)) {
        any = true;
        col_live[c] = 1;
      }
    }
    if (any) live_rows.push_back(r);
  }

  Compaction out;
  out.live_rows = live_rows.size();
  out.live_cols = static_cast<std::size_t>(
      std::count(col_live.begin(), col_live.end(), std::uint8_t{1}));
  // A column that is dead globally has no kept entry in any band either, so
  // stage 2 only needs to look at bands of surviving rows.
  for (std::size_t start = 0; start < live_rows.size(); start += xbar_size) {
    const std::size_t end = std::min(live_rows.size(), start + xbar_size);
    std::vector<std::uint8_t> seg(m.cols(), 0);
    for (std::size_t i = start; i < end; ++i) {
      const std::size_t r = live_rows[i];
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (m.kept(r, c)) seg[c] = 1;
      }
    }
    const std::size_t segments = static_cast<std::size_t>(
        std::count(seg.begin(), seg.end(), std::uint8_t{1}));
    out.band_segments.push_back(segments);
    out.xbars += ceil_div(segments, xbar_size);
  }
  return out;
}

std::size_t weight_xbars(const LayerMatrix& m, const CrossbarConfig& cfg) {
  return compact(m, cfg.xbar_size).xbars * cfg.cells_per_weight;
}

std::size_t unpruned_weight_xbars(std::size_t rows, std::size_t cols,
                                  const CrossbarConfig& cfg) {
  check_size(cfg);
  return ceil_div(rows, cfg.xbar_size) * ceil_div(cols, cfg.xbar_size) *
         cfg.cells_per_weight;
}

ActivationUsage activation_cells(std::size_t live_channels, std::size_t positions,
                                 std::size_t in_flight, const CrossbarConfig& cfg) {
  check_size(cfg);
  ActivationUsage u;
  u.cells = static_cast<std::uint64_t>(live_channels) * positions * in_flight;
  u.xbars = ceil_div(u.cells, cfg.cells_per_xbar());
  return u;
}

ActivationUsage activation_cells(const nn::Model& model, std::size_t t,
                                 const CrossbarConfig& cfg, std::size_t in_flight) {
  if (t >= model.num_trainable()) {
    throw InvalidInput("trainable layer " + std::to_string(t) + " out of range");
  }
  const LayerMatrix m = layer_to_matrix(model.weights()[t], model.masks()[t]);
  const Compaction c = compact(m, cfg.xbar_size);
  return activation_cells(c.live_cols, nn::output_positions(model, t), in_flight,
                          cfg);
}

}  // namespace xbarprune::xbar
