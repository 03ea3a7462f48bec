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

// Weight-to-crossbar mapping and the accounting of what a mask saves.
//
// A trainable layer is viewed as a matrix with one row per input index
// (ic, ki, kj) and one column per filter. The matrix is cut into S x S
// crossbar tiles. A cell is reusable only when its whole row or its whole
// column inside the tile is pruned: an input drives a full crossbar row and
// an output sums a full crossbar column, so any kept weight pins the rest
// of its row and column.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/nn/tensor.hpp"

namespace xbarprune::xbar {

struct CrossbarConfig {
  std::size_t xbar_size = 128;
  std::size_t xbars_per_tile = 96;
  std::size_t tiles = 256;
  double freq_hz = 1e7;
  // Metadata only; no area/power model consumes these.
  double tile_area_mm2 = 0.37;
  double tile_power_w = 0.33;
  int bits = 16;
  /// ReRAM cells per stored weight.
  std::size_t cells_per_weight = 1;

  std::size_t total_budget() const { return tiles * xbars_per_tile; }
  std::size_t cells_per_xbar() const { return xbar_size * xbar_size; }
};

/// The 2-D crossbar view of one layer: rows = ic*k*k (or in_features),
/// cols = oc (or out_features). Row-major storage.
class LayerMatrix {
 public:
  LayerMatrix() = default;
  LayerMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0f), keep_(rows * cols, 1) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  float value(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  bool kept(std::size_t r, std::size_t c) const { return keep_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, float v, bool keep) {
    values_[r * cols_ + c] = v;
    keep_[r * cols_ + c] = keep ? 1 : 0;
  }
  void prune(std::size_t r, std::size_t c) { keep_[r * cols_ + c] = 0; }

  std::size_t kept_count() const;

  /// Matrix row holding kernel index (ic, ki, kj) of a k x k kernel.
  static constexpr std::size_t row_of(std::size_t ic, std::size_t ki,
                                      std::size_t kj, std::size_t k) {
    return (ic * k + ki) * k + kj;
  }
  static constexpr std::size_t col_of(std::size_t oc) { return oc; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
  std::vector<std::uint8_t> keep_;
};

/// Builds the matrix view of weights with dims (oc, ic, k, k).
LayerMatrix layer_to_matrix(const nn::Tensor4& weights, const nn::PruneMask& mask);
/// Matrix view of layer `layer` of the model; throws InvalidInput for a
/// layer without weights.
LayerMatrix layer_to_matrix(const nn::Model& model, std::size_t layer);
/// Inverse of layer_to_matrix.
std::pair<nn::Tensor4, nn::PruneMask> matrix_to_layer(const LayerMatrix& m,
                                                      nn::Dims4 weight_dims);

/// Partition of a rows x cols matrix into S x S crossbars; edge tiles are
/// truncated.
struct TileGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size = 128;

  std::size_t row_bands() const { return (rows + size - 1) / size; }
  std::size_t col_bands() const { return (cols + size - 1) / size; }
  std::size_t row_begin(std::size_t a) const { return a * size; }
  std::size_t row_end(std::size_t a) const { return std::min(rows, (a + 1) * size); }
  std::size_t col_begin(std::size_t b) const { return b * size; }
  std::size_t col_end(std::size_t b) const { return std::min(cols, (b + 1) * size); }
};

/// Reusable cells of one crossbar tile (a, b).
struct CrossbarSavings {
  std::size_t band_row = 0;
  std::size_t band_col = 0;
  std::size_t tile_rows = 0;
  std::size_t tile_cols = 0;
  std::size_t saved_rows = 0;
  std::size_t saved_cols = 0;
  /// saved_rows*tile_cols + saved_cols*tile_rows - saved_rows*saved_cols
  std::size_t saved_cells = 0;
};

/// Per-tile saved rows, columns and cells. A row is saved in a tile iff
/// every entry of that row within the tile's column range is pruned;
/// columns symmetrically.
std::vector<CrossbarSavings> saved_rows_cols(const LayerMatrix& m,
                                             const CrossbarConfig& cfg);

std::size_t total_saved_cells(const std::vector<CrossbarSavings>& tiles);

/// Result of deleting dead rows/columns and repacking live column
/// segments within each row band.
struct Compaction {
  std::size_t live_rows = 0;
  std::size_t live_cols = 0;
  /// Live column segments per band of surviving rows.
  std::vector<std::size_t> band_segments;
  std::size_t xbars = 0;
};

/// Two-stage compaction. Stage 1 drops rows and columns with no kept entry
/// anywhere. Stage 2 groups the surviving rows into bands of S; in band a
/// a surviving column contributes a segment iff it has a kept entry inside
/// the band, and the band needs ceil(segments / S) crossbars.
Compaction compact(const LayerMatrix& m, std::size_t xbar_size);

/// Crossbars holding the layer's weights after compaction.
std::size_t weight_xbars(const LayerMatrix& m, const CrossbarConfig& cfg);

/// ceil(rows/S) * ceil(cols/S).
std::size_t unpruned_weight_xbars(std::size_t rows, std::size_t cols,
                                  const CrossbarConfig& cfg);

struct ActivationUsage {
  std::uint64_t cells = 0;
  std::size_t xbars = 0;
};

/// Stored activations of a layer with `live_channels` output channels of
/// `positions` (= O*O) values each: cells = live*positions*in_flight,
/// crossbars = ceil(cells / S^2).
ActivationUsage activation_cells(std::size_t live_channels, std::size_t positions,
                                 std::size_t in_flight, const CrossbarConfig& cfg);

/// Same, for trainable layer t of a model; live channels are the columns
/// that survive stage-1 compaction.
ActivationUsage activation_cells(const nn::Model& model, std::size_t t,
                                 const CrossbarConfig& cfg, std::size_t in_flight);

}  // namespace xbarprune::xbar
