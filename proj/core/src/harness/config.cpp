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

#include "xbarprune/harness/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "xbarprune/errors.hpp"
#include "xbarprune/nn/serialize.hpp"

namespace xbarprune::harness {

using nlohmann::json;

namespace {

// Reads the keys of one config section, rejecting keys it does not know.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidInput("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidInput("config: " + name_ + "." + key + " has the wrong type");
    }
  }

  void raw(const char* key, json& out) {
    seen_.insert(key);
    if (j_.contains(key)) out = j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw InvalidInput("config: unknown key " + name_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

const json& sub(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

pruner::PruneConfig ExperimentConfig::prune_config() const {
  pruner::PruneConfig c;
  c.p = prune.p;
  c.epochs = prune.E;
  c.final_epochs = prune.F;
  c.max_iter = prune.max_iter;
  c.acc_slack = prune.acc_slack;
  c.xbar_size = crossbar.xbar_size;
  c.group_lasso = prune.group_lasso;
  c.train = train;
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Section top(j, "config");
  json dummy;
  for (const char* k : {"model", "dataset", "train", "prune", "crossbar", "sim"}) {
    top.raw(k, dummy);
  }
  top.finish();

  Section m(sub(j, "model"), "model");
  m.get("preset", c.model.preset);
  m.raw("layers", c.model.layers);
  m.finish();

  Section d(sub(j, "dataset"), "dataset");
  d.get("name", c.dataset.name);
  d.get("path", c.dataset.path);
  d.get("train_subset", c.dataset.train_subset);
  d.get("test_subset", c.dataset.test_subset);
  d.get("seed", c.dataset.seed);
  d.get("blob_classes", c.dataset.blob_classes);
  d.get("blob_side", c.dataset.blob_side);
  d.get("blob_noise", c.dataset.blob_noise);
  d.get("blob_train", c.dataset.blob_train);
  d.get("blob_test", c.dataset.blob_test);
  d.finish();

  Section t(sub(j, "train"), "train");
  t.get("lr0", c.train.lr0);
  t.get("lr_decay_per_epoch", c.train.lr_decay_per_epoch);
  t.get("batch_size", c.train.batch_size);
  t.get("rng_seed", c.train.rng_seed);
  t.finish();

  Section p(sub(j, "prune"), "prune");
  p.get("method", c.prune.method);
  p.get("p", c.prune.p);
  p.get("E", c.prune.E);
  p.get("F", c.prune.F);
  p.get("max_iter", c.prune.max_iter);
  p.get("acc_slack", c.prune.acc_slack);
  p.get("init_seed", c.prune.init_seed);
  p.get("block_h", c.prune.block_h);
  p.get("block_w", c.prune.block_w);
  p.get("group_lasso", c.prune.group_lasso);
  p.finish();

  Section x(sub(j, "crossbar"), "crossbar");
  x.get("xbar_size", c.crossbar.xbar_size);
  x.get("xbars_per_tile", c.crossbar.xbars_per_tile);
  x.get("tiles", c.crossbar.tiles);
  x.get("freq_hz", c.crossbar.freq_hz);
  x.get("tile_area_mm2", c.crossbar.tile_area_mm2);
  x.get("tile_power_w", c.crossbar.tile_power_w);
  x.get("bits", c.crossbar.bits);
  x.get("cells_per_weight", c.crossbar.cells_per_weight);
  x.finish();

  Section s(sub(j, "sim"), "sim");
  s.get("budget", c.sim.budget);
  s.get("kappa", c.sim.kappa);
  s.get("in_flight", c.sim.in_flight);
  s.finish();

  if (!(c.prune.p > 0.0 && c.prune.p < 1.0)) throw InvalidInput("config: prune.p must lie in (0, 1)");
  if (c.prune.acc_slack < 0.0) throw InvalidInput("config: prune.acc_slack must be >= 0");
  if (c.train.batch_size == 0) throw InvalidInput("config: train.batch_size must be positive");
  if (c.crossbar.xbar_size == 0) throw InvalidInput("config: crossbar.xbar_size must be positive");
  if (c.sim.in_flight == 0) throw InvalidInput("config: sim.in_flight must be positive");
  if (c.prune.block_h == 0 || c.prune.block_w == 0) {
    throw InvalidInput("config: prune.block_h and block_w must be positive");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"model", {{"preset", c.model.preset}, {"layers", c.model.layers}}},
          {"dataset",
           {{"name", c.dataset.name},
            {"path", c.dataset.path},
            {"train_subset", c.dataset.train_subset},
            {"test_subset", c.dataset.test_subset},
            {"seed", c.dataset.seed},
            {"blob_classes", c.dataset.blob_classes},
            {"blob_side", c.dataset.blob_side},
            {"blob_noise", c.dataset.blob_noise},
            {"blob_train", c.dataset.blob_train},
            {"blob_test", c.dataset.blob_test}}},
          {"train",
           {{"lr0", c.train.lr0},
            {"lr_decay_per_epoch", c.train.lr_decay_per_epoch},
            {"batch_size", c.train.batch_size},
            {"rng_seed", c.train.rng_seed}}},
          {"prune",
           {{"method", c.prune.method},
            {"p", c.prune.p},
            {"E", c.prune.E},
            {"F", c.prune.F},
            {"max_iter", c.prune.max_iter},
            {"acc_slack", c.prune.acc_slack},
            {"init_seed", c.prune.init_seed},
            {"block_h", c.prune.block_h},
            {"block_w", c.prune.block_w},
            {"group_lasso", c.prune.group_lasso}}},
          {"crossbar",
           {{"xbar_size", c.crossbar.xbar_size},
            {"xbars_per_tile", c.crossbar.xbars_per_tile},
            {"tiles", c.crossbar.tiles},
            {"freq_hz", c.crossbar.freq_hz},
            {"tile_area_mm2", c.crossbar.tile_area_mm2},
            {"tile_power_w", c.crossbar.tile_power_w},
            {"bits", c.crossbar.bits},
            {"cells_per_weight", c.crossbar.cells_per_weight}}},
          {"sim",
           {{"budget", c.sim.budget},
            {"kappa", c.sim.kappa},
            {"in_flight", c.sim.in_flight}}}};
}

std::string config_hash(const ExperimentConfig& cfg) {
  return nn::hex64(nn::fnv1a64(config_to_json(cfg).dump()));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  // An empty file means "all defaults".
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return ExperimentConfig{};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace xbarprune::harness
