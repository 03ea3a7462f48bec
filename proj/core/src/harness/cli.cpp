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

#include "xbarprune/harness/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "xbarprune/errors.hpp"
#include "xbarprune/harness/config.hpp"
#include "xbarprune/harness/dataset.hpp"
#include "xbarprune/harness/experiment.hpp"
#include "xbarprune/harness/report.hpp"
#include "xbarprune/nn/serialize.hpp"
#include "xbarprune/perf/pipeline.hpp"
#include "xbarprune/pruner/checkpoint.hpp"
#include "xbarprune/xbar/footprint.hpp"

namespace xbarprune::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string method;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string budget;
  std::string format = "json";
  std::string checkpoint;
  std::string weights;
  std::string input;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.method.empty()) cfg.prune.method = o.method;
  if (o.seed) cfg.prune.init_seed = *o.seed;
  if (!o.budget.empty()) cfg.sim.budget = o.budget;
  return cfg;
}

void check_format(const Options& o) {
  if (o.format != "json" && o.format != "csv") {
    throw InvalidInput("--format must be json or csv, got '" + o.format + "'");
  }
}

fs::path out_dir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

// Writes `text` to <out>/<name>, or to `out` when --out is absent.
void emit(const Options& o, const std::string& name, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  const fs::path p = out_dir(o) / name;
  std::ofstream os(p);
  if (!os || !(os << text)) throw InvalidInput("cannot write " + p.string());
  out << "wrote " << p.string() << '\n';
}

pruner::MaskCheckpoint need_checkpoint(const Options& o) {
  if (o.checkpoint.empty()) throw InvalidInput("--checkpoint is required");
  return pruner::load_checkpoint(o.checkpoint);
}

void cmd_prune(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const DatasetPair data = load_dataset(cfg.dataset);
  const nn::Model initial = initial_model(cfg, data);
  const auto res = run_method(cfg.prune.method, initial, data, cfg);
  const auto ck = pruner::make_checkpoint(res, cfg.prune.init_seed, cfg.prune.method);
  const fs::path p = out_dir(o) / ("mask_" + cfg.prune.method + ".json");
  pruner::save_checkpoint(ck, p);
  out << "method=" << cfg.prune.method << " sparsity=" << res.model.sparsity()
      << " baseline_accuracy=" << res.baseline_accuracy << " accuracy=" << res.accuracy
      << " iterations=" << res.history.size() << " stop=" << res.stop_reason
      << " checkpoint=" << p.string() << '\n';
}

void cmd_train(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const auto ck = need_checkpoint(o);
  const DatasetPair data = load_dataset(cfg.dataset);
  nn::Model m = pruner::model_from_checkpoint(ck);
  const double acc = pruner::final_retrain(m, data.train, data.test, cfg.prune_config());
  const json j{{"format", "xbarprune-weights"},
               {"version", 1},
               {"checkpoint", pruner::checkpoint_to_json(ck)},
               {"epochs", cfg.prune.F},
               {"accuracy", acc},
               {"weights", nn::weights_to_json(m)}};
  const fs::path p = out_dir(o) / ("trained_" + ck.method + ".json");
  std::ofstream os(p);
  if (!os || !(os << j.dump() << '\n')) throw InvalidInput("cannot write " + p.string());
  out << "method=" << ck.method << " epochs=" << cfg.prune.F << " accuracy=" << acc
      << " sparsity=" << m.sparsity() << " weights=" << p.string() << '\n';
}

void cmd_eval(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  if (o.weights.empty()) throw InvalidInput("--weights is required");
  std::ifstream is(o.weights);
  if (!is) throw InvalidInput("cannot open " + o.weights);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(o.weights + " is not valid JSON: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "xbarprune-weights") {
    throw InvalidInput(o.weights + " is not an xbarprune weights file");
  }
  const auto ck = pruner::checkpoint_from_json(j.at("checkpoint"));
  nn::Model m = pruner::model_from_checkpoint(ck);
  nn::weights_from_json(m, j.at("weights"));
  m.apply_masks();
  const DatasetPair data = load_dataset(cfg.dataset);
  out << "accuracy=" << nn::evaluate(m, data.test) << " samples=" << data.test.size() << '\n';
}

void cmd_map(const Options& o, std::ostream& out) {
  check_format(o);
  const ExperimentConfig cfg = load(o);
  const nn::Model m = pruner::model_from_checkpoint(need_checkpoint(o));
  const auto fp = xbar::model_footprint(m, cfg.crossbar, cfg.sim.in_flight);
  std::ostringstream ss;
  if (o.format == "csv") {
    xbar::write_footprint_csv(ss, fp);
  } else {
    ss << xbar::footprint_to_json(fp).dump(2) << '\n';
  }
  emit(o, "footprint." + o.format, ss.str(), out);
}

void cmd_simulate(const Options& o, std::ostream& out) {
  check_format(o);
  const ExperimentConfig cfg = load(o);
  const nn::Model m = pruner::model_from_checkpoint(need_checkpoint(o));
  const HardwareSummary h = analyze_hardware(m, cfg);
  std::ostringstream ss;
  if (o.format == "csv") {
    perf::write_plan_csv(ss, h.pruned_plan);
  } else {
    const auto iso = perf::iso_perf_xbars(perf::stages_from_footprint(h.footprint, false),
                                          perf::stages_from_footprint(h.footprint, true),
                                          h.unpruned_plan.replication());
    json j = perf::plan_to_json(h.pruned_plan, h.speedup);
    j["unpruned"] = perf::plan_to_json(h.unpruned_plan, 1.0);
    j["iso_perf"] = {{"unpruned_xbars", iso.unpruned_xbars},
                     {"pruned_xbars", iso.pruned_xbars},
                     {"savings", iso.savings}};
    ss << j.dump(2) << '\n';
  }
  emit(o, "plan." + o.format, ss.str(), out);
}

void cmd_compare(const Options& o, std::ostream& out) {
  check_format(o);
  const ExperimentConfig cfg = load(o);
  const DatasetPair data = load_dataset(cfg.dataset);
  std::optional<fs::path> dir;
  if (!o.out.empty()) dir = out_dir(o);
  const RunReport r = compare(cfg, data, dir);
  std::ostringstream ss;
  if (o.format == "csv") {
    write_report_csv(ss, r);
  } else {
    ss << report_to_json(r).dump(2) << '\n';
  }
  emit(o, "report." + o.format, ss.str(), out);
}

void cmd_report(const Options& o, std::ostream& out) {
  check_format(o);
  if (o.input.empty()) throw InvalidInput("--input is required");
  std::ifstream is(o.input);
  if (!is) throw InvalidInput("cannot open " + o.input);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(o.input + " is not valid JSON: " + e.what());
  }
  const RunReport r = report_from_json(j);
  std::ostringstream ss;
  if (o.format == "csv") {
    write_report_csv(ss, r);
  } else {
    ss << report_to_json(r).dump(2) << '\n';
  }
  emit(o, "report." + o.format, ss.str(), out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crossbar-aware lottery-ticket pruning and ReRAM cost model", "xbarprune"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config JSON (defaults when omitted)");
    sub->add_option("--seed", o.seed, "initialization seed override");
    sub->add_option("--out", o.out, "output directory");
  };
  auto fmt = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "json or csv");
  };

  auto* prune = app.add_subcommand("prune", "run a pruning method and write a mask checkpoint");
  common(prune);
  prune->add_option("--method", o.method, "realprune, ltp, column or block");

  auto* train = app.add_subcommand("train", "retrain a checkpointed mask from its initialization");
  common(train);
  train->add_option("--checkpoint", o.checkpoint, "mask checkpoint")->required();

  auto* eval = app.add_subcommand("eval", "evaluate trained weights on the test split");
  common(eval);
  eval->add_option("--weights", o.weights, "weights file written by `train`")->required();

  auto* map = app.add_subcommand("map", "crossbar footprint of a checkpoint");
  common(map);
  fmt(map);
  map->add_option("--checkpoint", o.checkpoint, "mask checkpoint")->required();

  auto* sim = app.add_subcommand("simulate", "replication plan and iso-area speedup");
  common(sim);
  fmt(sim);
  sim->add_option("--checkpoint", o.checkpoint, "mask checkpoint")->required();
  sim->add_option("--budget", o.budget, "unpruned, chip or a crossbar count");

  auto* cmp = app.add_subcommand("compare", "run every method and emit a report");
  common(cmp);
  fmt(cmp);
  cmp->add_option("--budget", o.budget, "unpruned, chip or a crossbar count");

  auto* rep = app.add_subcommand("report", "re-emit a JSON report as JSON or CSV");
  rep->add_option("--input", o.input, "report JSON")->required();
  rep->add_option("--out", o.out, "output directory");
  fmt(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*prune) cmd_prune(o, out);
    else if (*train) cmd_train(o, out);
    else if (*eval) cmd_eval(o, out);
    else if (*map) cmd_map(o, out);
    else if (*sim) cmd_simulate(o, out);
    else if (*cmp) cmd_compare(o, out);
    else if (*rep) cmd_report(o, out);
  } catch (const std::exception& e) {
    err << "xbarprune: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace xbarprune::harness
