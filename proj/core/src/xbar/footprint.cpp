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

#include "xbarprune/xbar/footprint.hpp"

#include "xbarprune/errors.hpp"

namespace xbarprune::xbar {

std::size_t ModelFootprint::weight_xbars_unpruned() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight_xbars_unpruned;
  return n;
}

std::size_t ModelFootprint::weight_xbars_pruned() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight_xbars_pruned;
  return n;
}

std::size_t ModelFootprint::act_xbars_unpruned() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.act_xbars_unpruned;
  return n;
}

std::size_t ModelFootprint::act_xbars_pruned() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.act_xbars_pruned;
  return n;
}

double ModelFootprint::savings_fraction() const {
  const std::size_t base = total_unpruned();
  if (base == 0) return 0.0;
  return 1.0 - static_cast<double>(total_pruned()) / static_cast<double>(base);
}

ModelFootprint model_footprint(const nn::Model& model, const CrossbarConfig& cfg,
                               std::size_t in_flight) {
  if (in_flight == 0) throw InvalidInput("in_flight must be positive");
  ModelFootprint fp;
  fp.in_flight = in_flight;
  fp.xbar_size = cfg.xbar_size;
  fp.chip_budget = cfg.total_budget();
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const LayerMatrix m = layer_to_matrix(model.weights()[t], model.masks()[t]);
    const Compaction c = compact(m, cfg.xbar_size);
    LayerFootprint l;
    l.layer = model.layer_of(t);
    l.kind = nn::layer_kind_name(model.layers()[l.layer]);
    l.rows = m.rows();
    l.cols = m.cols();
    l.out_h = model.output_shape(l.layer).h;
    l.out_w = model.output_shape(l.layer).w;
    l.positions = nn::output_positions(model, t);
    l.live_rows = c.live_rows;
    l.live_cols = c.live_cols;
    if (l.live_cols == 0) {
      throw DegenerateModel("layer " + std::to_string(l.layer) +
                            " has every weight pruned; no live output remains");
    }
    l.weight_xbars_unpruned = unpruned_weight_xbars(m.rows(), m.cols(), cfg);
    l.weight_xbars_pruned = c.xbars * cfg.cells_per_weight;
    const auto full = activation_cells(l.cols, l.positions, in_flight, cfg);
    const auto live = activation_cells(l.live_cols, l.positions, in_flight, cfg);
    l.act_cells_unpruned = full.cells;
    l.act_cells_pruned = live.cells;
    l.act_xbars_unpruned = full.xbars;
    l.act_xbars_pruned = live.xbars;
    l.saved_cells = total_saved_cells(saved_rows_cols(m, cfg));
    l.sparsity = model.masks()[t].sparsity();
    fp.layers.push_back(std::move(l));
  }
  return fp;
}

nlohmann::json footprint_to_json(const ModelFootprint& fp) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : fp.layers) {
    layers.push_back({{"layer", l.layer},
                      {"kind", l.kind},
                      {"rows", l.rows},
                      {"cols", l.cols},
                      {"out_h", l.out_h},
                      {"out_w", l.out_w},
                      {"positions", l.positions},
                      {"live_rows", l.live_rows},
                      {"live_cols", l.live_cols},
                      {"sparsity", l.sparsity},
                      {"saved_cells", l.saved_cells},
                      {"weight_xbars_unpruned", l.weight_xbars_unpruned},
                      {"weight_xbars_pruned", l.weight_xbars_pruned},
                      {"act_cells_unpruned", l.act_cells_unpruned},
                      {"act_cells_pruned", l.act_cells_pruned},
                      {"act_xbars_unpruned", l.act_xbars_unpruned},
                      {"act_xbars_pruned", l.act_xbars_pruned}});
  }
  return {{"xbar_size", fp.xbar_size},
          {"in_flight", fp.in_flight},
          {"chip_budget", fp.chip_budget},
          {"exceeds_chip_budget", fp.exceeds_chip_budget()},
          {"weight_xbars_unpruned", fp.weight_xbars_unpruned()},
          {"weight_xbars_pruned", fp.weight_xbars_pruned()},
          {"act_xbars_unpruned", fp.act_xbars_unpruned()},
          {"act_xbars_pruned", fp.act_xbars_pruned()},
          {"total_unpruned", fp.total_unpruned()},
          {"total_pruned", fp.total_pruned()},
          {"savings_fraction", fp.savings_fraction()},
          {"layers", std::move(layers)}};
}

void write_footprint_csv(std::ostream& os, const ModelFootprint& fp) {
  os << "layer,rows,cols,live_rows,live_cols,xbars_unpruned,xbars_pruned,"
        "act_cells_unpruned,act_cells_pruned\n";
  for (const auto& l : fp.layers) {
    os << l.layer << ',' << l.rows << ',' << l.cols << ',' << l.live_rows << ','
       << l.live_cols << ',' << l.weight_xbars_unpruned << ','
       << l.weight_xbars_pruned << ',' << l.act_cells_unpruned << ','
       << l.act_cells_pruned << '\n';
  }
}

}  // namespace xbarprune::xbar
