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

#include "xbarprune/pruner/checkpoint.hpp"

#include <fstream>

#include "xbarprune/errors.hpp"
#include "xbarprune/nn/ops.hpp"
#include "xbarprune/nn/serialize.hpp"

namespace xbarprune::pruner {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "xbarprune-mask";
constexpr int kVersion = 1;

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("checkpoint: missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("checkpoint: field '") + key + "' has the wrong type");
  }
}

}  // namespace

MaskCheckpoint make_checkpoint(const PruneResult& result, std::uint64_t init_seed,
                               const std::string& method) {
  MaskCheckpoint ck;
  ck.architecture = nn::architecture_to_json(result.model);
  ck.model_hash = nn::architecture_hash(result.model);
  ck.init_seed = init_seed;
  ck.method = method;
  ck.baseline_accuracy = result.baseline_accuracy;
  ck.accuracy = result.accuracy;
  for (const auto& g : result.granularity_history) ck.granularity_history.push_back(g.name());
  for (const auto& rec : result.history) {
    ck.accuracy_log.push_back(
        {rec.iteration, rec.granularity.name(), rec.sparsity, rec.accuracy, rec.accepted});
  }
  ck.masks = result.model.masks();
  return ck;
}

json checkpoint_to_json(const MaskCheckpoint& ck) {
  json log = json::array();
  for (const auto& e : ck.accuracy_log) {
    log.push_back({{"iteration", e.iteration},
                   {"granularity", e.granularity},
                   {"sparsity", e.sparsity},
                   {"accuracy", e.accuracy},
                   {"accepted", e.accepted}});
  }
  const nn::Model arch = nn::model_from_architecture(ck.architecture);
  json layers = json::array();
  for (std::size_t t = 0; t < ck.masks.size(); ++t) {
    const auto& d = ck.masks[t].dims();
    layers.push_back({{"layer", arch.layer_of(t)},
                      {"shape", {d.n, d.c, d.h, d.w}},
                      {"keep", nn::mask_to_hex(ck.masks[t])}});
  }
  return {{"format", kFormat},
          {"version", kVersion},
          {"model_hash", ck.model_hash},
          {"architecture", ck.architecture},
          {"init_seed", ck.init_seed},
          {"method", ck.method},
          {"baseline_accuracy", ck.baseline_accuracy},
          {"accuracy", ck.accuracy},
          {"granularity_history", ck.granularity_history},
          {"accuracy_log", std::move(log)},
          {"layers", std::move(layers)}};
}

MaskCheckpoint checkpoint_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("checkpoint: not a JSON object");
  if (field<std::string>(j, "format") != kFormat) {
    throw InvalidInput("checkpoint: format is not '" + std::string(kFormat) + "'");
  }
  const int version = field<int>(j, "version");
  if (version != kVersion) {
    throw InvalidInput("checkpoint: unsupported version " + std::to_string(version));
  }
  MaskCheckpoint ck;
  ck.architecture = field<json>(j, "architecture");
  const nn::Model arch = nn::model_from_architecture(ck.architecture);
  ck.model_hash = field<std::string>(j, "model_hash");
  if (ck.model_hash != nn::architecture_hash(arch)) {
    throw InvalidInput("checkpoint: model_hash does not match the architecture");
  }
  ck.init_seed = field<std::uint64_t>(j, "init_seed");
  ck.method = field<std::string>(j, "method");
  ck.baseline_accuracy = field<double>(j, "baseline_accuracy");
  ck.accuracy = field<double>(j, "accuracy");
  ck.granularity_history = field<std::vector<std::string>>(j, "granularity_history");
  for (const auto& e : field<json>(j, "accuracy_log")) {
    ck.accuracy_log.push_back({field<std::size_t>(e, "iteration"),
                               field<std::string>(e, "granularity"),
                               field<double>(e, "sparsity"), field<double>(e, "accuracy"),
                               field<bool>(e, "accepted")});
  }
  const json layers = field<json>(j, "layers");
  if (!layers.is_array() || layers.size() != arch.num_trainable()) {
    throw InvalidInput("checkpoint: expected one mask per trainable layer");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const json& l = layers[t];
    const nn::Dims4 want = arch.weights()[t].dims();
    const auto shape = field<std::vector<std::size_t>>(l, "shape");
    if (shape != std::vector<std::size_t>{want.n, want.c, want.h, want.w} ||
        field<std::size_t>(l, "layer") != arch.layer_of(t)) {
      throw InvalidInput("checkpoint: mask " + std::to_string(t) +
                         " does not match layer shape " + want.str());
    }
    ck.masks.push_back(nn::mask_from_hex(field<std::string>(l, "keep"), want));
  }
  return ck;
}

void save_checkpoint(const MaskCheckpoint& ck, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write checkpoint " + path.string());
  os << checkpoint_to_json(ck).dump(1) << '\n';
  if (!os) throw InvalidInput("failed writing checkpoint " + path.string());
}

MaskCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open checkpoint " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

nn::Model model_from_checkpoint(const MaskCheckpoint& ck) {
  nn::Model m = nn::model_from_architecture(ck.architecture);
  if (ck.masks.size() != m.num_trainable()) {
    throw InvalidInput("checkpoint: mask count does not match the architecture");
  }
  m.masks() = ck.masks;
  nn::xavier_init(m, ck.init_seed);
  m.apply_masks();
  return m;
}

}  // namespace xbarprune::pruner
