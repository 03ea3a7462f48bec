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

#include "xbarprune/nn/serialize.hpp"

#include <cstring>

#include "xbarprune/errors.hpp"

namespace xbarprune::nn {

using nlohmann::json;

namespace {

std::size_t get_size(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    throw InvalidInput(std::string("layer field '") + key +
                       "' missing or not a non-negative integer");
  }
  return j.at(key).get<std::size_t>();
}

std::size_t get_size_or(const json& j, const char* key, std::size_t fallback) {
  return j.contains(key) ? get_size(j, key) : fallback;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

json layer_to_json(const LayerDef& layer) {
  json j;
  j["kind"] = layer_kind_name(layer);
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    j["ic"] = c->ic;
    j["oc"] = c->oc;
    j["k"] = c->k;
    j["stride"] = c->stride;
    j["pad"] = c->pad;
  } else if (const auto* l = std::get_if<LinearSpec>(&layer)) {
    j["in"] = l->in;
    j["out"] = l->out;
  } else if (const auto* p = std::get_if<MaxPoolSpec>(&layer)) {
    j["k"] = p->k;
    j["stride"] = p->stride;
  } else if (const auto* r = std::get_if<ResidualAddSpec>(&layer)) {
    j["from"] = r->from;
  }
  return j;
}

LayerDef layer_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidInput("layer entry must be an object with a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "conv") {
    return ConvSpec{get_size(j, "ic"), get_size(j, "oc"), get_size(j, "k"),
                    get_size_or(j, "stride", 1), get_size_or(j, "pad", 0)};
  }
  if (kind == "linear") return LinearSpec{get_size(j, "in"), get_size(j, "out")};
  if (kind == "relu") return ReluSpec{};
  if (kind == "maxpool") {
    return MaxPoolSpec{get_size_or(j, "k", 2), get_size_or(j, "stride", 2)};
  }
  if (kind == "residual_add") return ResidualAddSpec{get_size(j, "from")};
  if (kind == "flatten") return FlattenSpec{};
  throw InvalidInput("unknown layer kind '" + kind + "'");
}

json layers_to_json(const std::vector<LayerDef>& layers) {
  json arr = json::array();
  for (const auto& l : layers) arr.push_back(layer_to_json(l));
  return arr;
}

std::vector<LayerDef> layers_from_json(const json& j) {
  if (!j.is_array()) throw InvalidInput("layer list must be a JSON array");
  std::vector<LayerDef> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(layer_from_json(e));
  return out;
}

json architecture_to_json(const Model& model) {
  const Shape3& s = model.input_shape();
  return json{{"input_shape", {s.c, s.h, s.w}},
              {"layers", layers_to_json(model.layers())}};
}

Model model_from_architecture(const json& j) {
  if (!j.contains("input_shape") || !j.at("input_shape").is_array() ||
      j.at("input_shape").size() != 3) {
    throw InvalidInput("architecture needs input_shape [c, h, w]");
  }
  const auto& s = j.at("input_shape");
  return Model(Shape3{1, s[0].get<std::size_t>(), s[1].get<std::size_t>(),
                      s[2].get<std::size_t>()},
               layers_from_json(j.at("layers")));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

std::string architecture_hash(const Model& model) {
  return hex64(fnv1a64(architecture_to_json(model).dump()));
}

std::string serialize_state(const Model& model) {
  std::string out;
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const auto& w = model.weights()[t];
    const auto bits = model.masks()[t].bits();
    const std::size_t start = out.size();
    out.resize(start + w.size() * sizeof(float) + bits.size());
    std::memcpy(out.data() + start, w.data(), w.size() * sizeof(float));
    std::memcpy(out.data() + start + w.size() * sizeof(float), bits.data(),
                bits.size());
  }
  return out;
}

std::string mask_to_hex(const PruneMask& mask) {
  static constexpr char digits[] = "0123456789abcdef";
  const std::size_t nbytes = (mask.size() + 7) / 8;
  std::string hex(nbytes * 2, '0');
  for (std::size_t b = 0; b < nbytes; ++b) {
    unsigned byte = 0;
    for (std::size_t bit = 0; bit < 8; ++bit) {
      const std::size_t i = b * 8 + bit;
      if (i < mask.size() && mask.kept(i)) byte |= 1u << bit;
    }
    hex[2 * b] = digits[byte >> 4];
    hex[2 * b + 1] = digits[byte & 0xf];
  }
  return hex;
}

PruneMask mask_from_hex(std::string_view hex, Dims4 dims) {
  PruneMask mask(dims, false);
  const std::size_t nbytes = (mask.size() + 7) / 8;
  if (hex.size() != nbytes * 2) {
    throw InvalidInput("mask bitset has " + std::to_string(hex.size()) +
                       " hex digits, expected " + std::to_string(nbytes * 2));
  }
  for (std::size_t b = 0; b < nbytes; ++b) {
    const int hi = hex_value(hex[2 * b]), lo = hex_value(hex[2 * b + 1]);
    if (hi < 0 || lo < 0) throw InvalidInput("mask bitset is not hex");
    const unsigned byte = static_cast<unsigned>(hi * 16 + lo);
    for (std::size_t bit = 0; bit < 8; ++bit) {
      const std::size_t i = b * 8 + bit;
      if (i < mask.size()) {
        mask.set(i, (byte >> bit) & 1u);
      } else if ((byte >> bit) & 1u) {
        throw InvalidInput("mask bitset has bits set past the weight count");
      }
    }
  }
  return mask;
}

json weights_to_json(const Model& model) {
  json arr = json::array();
  for (const auto& w : model.weights()) {
    arr.push_back(std::vector<float>(w.values().begin(), w.values().end()));
  }
  return arr;
}

void weights_from_json(Model& model, const json& j) {
  if (!j.is_array() || j.size() != model.num_trainable()) {
    throw InvalidInput("weights: expected one array per trainable layer");
  }
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const auto v = j[t].get<std::vector<float>>();
    auto& w = model.weights()[t];
    if (v.size() != w.size()) {
      throw InvalidInput("weights: layer " + std::to_string(t) + " has " +
                         std::to_string(v.size()) + " values, expected " +
                         std::to_string(w.size()));
    }
    std::copy(v.begin(), v.end(), w.data());
  }
}

}  // namespace xbarprune::nn
