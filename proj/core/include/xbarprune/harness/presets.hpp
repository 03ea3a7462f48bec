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

#include <string>
#include <vector>

#include "xbarprune/harness/config.hpp"
#include "xbarprune/nn/model.hpp"

namespace xbarprune::harness {

/// Layer list of a named preset for the given input and class count.
///   "mini-vgg": 6 conv (3x3, pad 1, width 16) in 3 stages, each stage
///               closed by 2x2 max-pool, then linear -> 64 -> classes.
///   "mini-res": 8 conv with 3 identity residual adds (stages 8, 16, 16),
///               then linear -> classes.
///   "tiny":     2 conv (4/8) with pooling, then linear -> classes.
/// Throws InvalidInput for unknown names.
std::vector<nn::LayerDef> preset_layers(const std::string& name, const nn::Shape3& input,
                                        std::size_t classes);

std::vector<std::string> preset_names();

/// The model described by `cfg` (preset or inline layers), unpruned and
/// zero-initialized.
nn::Model build_model(const ModelConfig& cfg, const nn::Shape3& input, std::size_t classes);

}  // namespace xbarprune::harness
