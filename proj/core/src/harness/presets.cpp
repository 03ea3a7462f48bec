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

#include "xbarprune/harness/presets.hpp"

#include "xbarprune/errors.hpp"
#include "xbarprune/nn/serialize.hpp"

namespace xbarprune::harness {

using nn::ConvSpec;
using nn::FlattenSpec;
using nn::LayerDef;
using nn::LinearSpec;
using nn::MaxPoolSpec;
using nn::ReluSpec;
using nn::ResidualAddSpec;

namespace {

// Appends layers while tracking channels and spatial size.
struct Builder {
  std::vector<LayerDef> layers;
  std::size_t c, h, w;

  void conv(std::size_t oc) {
    layers.push_back(ConvSpec{c, oc, 3, 1, 1});
    layers.push_back(ReluSpec{});
    c = oc;
  }
  // conv -> relu -> conv -> add(input of the pair) -> relu
  void residual_pair() {
    const std::size_t src = layers.size() - 1;
    layers.push_back(ConvSpec{c, c, 3, 1, 1});
    layers.push_back(ReluSpec{});
    layers.push_back(ConvSpec{c, c, 3, 1, 1});
    layers.push_back(ResidualAddSpec{src});
    layers.push_back(ReluSpec{});
  }
  void pool() {
    layers.push_back(MaxPoolSpec{2, 2});
    h /= 2;
    w /= 2;
  }
  void flatten() {
    layers.push_back(FlattenSpec{});
    c = c * h * w;
    h = w = 1;
  }
  void linear(std::size_t out, bool relu) {
    layers.push_back(LinearSpec{c, out});
    if (relu) layers.push_back(ReluSpec{});
    c = out;
  }
};

}  // namespace

std::vector<std::string> preset_names() { return {"mini-vgg", "mini-res", "tiny"}; }

std::vector<LayerDef> preset_layers(const std::string& name, const nn::Shape3& input,
                                    std::size_t classes) {
  Builder b{{}, input.c, input.h, input.w};
  if (name == "mini-vgg") {
    // Equal widths keep the Xavier scale alike across convs, so the global
    // magnitude ranking does not strip one layer before the others.
    for (int stage = 0; stage < 3; ++stage) {
      b.conv(16);
      b.conv(16);
      b.pool();
    }
    b.flatten();
    b.linear(64, true);
    b.linear(classes, false);
  } else if (name == "mini-res") {
    b.conv(8);
    b.residual_pair();
    b.pool();
    b.conv(16);
    b.residual_pair();
    b.pool();
    b.residual_pair();
    b.pool();
    b.flatten();
    b.linear(classes, false);
  } else if (name == "tiny") {
    b.conv(4);
    b.pool();
    b.conv(8);
    b.pool();
    b.flatten();
    b.linear(classes, false);
  } else {
    throw InvalidInput("unknown model preset '" + name + "'");
  }
  return std::move(b.layers);
}

nn::Model build_model(const ModelConfig& cfg, const nn::Shape3& input, std::size_t classes) {
  if (!cfg.layers.is_null()) return nn::Model(input, nn::layers_from_json(cfg.layers));
  return nn::Model(input, preset_layers(cfg.preset, input, classes));
}

}  // namespace xbarprune::harness
