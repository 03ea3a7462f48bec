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
#include <string>
#include <string_view>
#include <vector>

#include "xbarprune/nn/model.hpp"

namespace xbarprune::nn {

nlohmann::json layer_to_json(const LayerDef& layer);
/// Throws InvalidInput on an unknown kind or missing field.
LayerDef layer_from_json(const nlohmann::json& j);

nlohmann::json layers_to_json(const std::vector<LayerDef>& layers);
std::vector<LayerDef> layers_from_json(const nlohmann::json& j);

/// Architecture description: input shape plus layer list.
nlohmann::json architecture_to_json(const Model& model);
Model model_from_architecture(const nlohmann::json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Stable hash of the architecture (not of the weights).
std::string architecture_hash(const Model& model);

/// Byte-exact dump of weights and masks, used to compare model states.
std::string serialize_state(const Model& model);

/// Mask bits packed LSB-first into bytes, hex-encoded.
std::string mask_to_hex(const PruneMask& mask);
PruneMask mask_from_hex(std::string_view hex, Dims4 dims);

/// Weights as JSON float arrays (exact float round-trip).
nlohmann::json weights_to_json(const Model& model);
void weights_from_json(Model& model, const nlohmann::json& j);

}  // namespace xbarprune::nn
