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

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "xbarprune/nn/model.hpp"
#include "xbarprune/xbar/crossbar.hpp"

namespace xbarprune::xbar {

struct LayerFootprint {
  std::size_t layer = 0;  ///< index into Model::layers()
  std::string kind;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  std::size_t positions = 0;  ///< out_h * out_w
  std::size_t live_rows = 0;
  std::size_t live_cols = 0;
  std::size_t weight_xbars_unpruned = 0;
  std::size_t weight_xbars_pruned = 0;
  std::uint64_t act_cells_unpruned = 0;
  std::uint64_t act_cells_pruned = 0;
  std::size_t act_xbars_unpruned = 0;
  std::size_t act_xbars_pruned = 0;
  std::size_t saved_cells = 0;  ///< summed over the layer's tiles
  double sparsity = 0.0;
};

/// Whole-model crossbar usage, pruned vs. unpruned.
struct ModelFootprint {
  std::vector<LayerFootprint> layers;
  std::size_t in_flight = 1;
  std::size_t xbar_size = 128;
  std::size_t chip_budget = 0;

  std::size_t weight_xbars_unpruned() const;
  std::size_t weight_xbars_pruned() const;
  std::size_t act_xbars_unpruned() const;
  std::size_t act_xbars_pruned() const;
  std::size_t total_unpruned() const { return weight_xbars_unpruned() + act_xbars_unpruned(); }
  std::size_t total_pruned() const { return weight_xbars_pruned() + act_xbars_pruned(); }
  /// 1 - pruned / unpruned.
  double savings_fraction() const;
  /// Unpruned model does not fit the chip at this in_flight.
  bool exceeds_chip_budget() const { return total_unpruned() > chip_budget; }
};

/// Sums weight and activation crossbars over all trainable layers. Throws
/// DegenerateModel if some layer has no live output channel.
ModelFootprint model_footprint(const nn::Model& model, const CrossbarConfig& cfg,
                               std::size_t in_flight = 1);

nlohmann::json footprint_to_json(const ModelFootprint& fp);

/// Columns: layer, rows, cols, live_rows, live_cols, xbars_unpruned,
/// xbars_pruned, act_cells_unpruned, act_cells_pruned.
void write_footprint_csv(std::ostream& os, const ModelFootprint& fp);

}  // namespace xbarprune::xbar
