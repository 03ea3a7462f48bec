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

#include "xbarprune/harness/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "xbarprune/errors.hpp"

namespace xbarprune::harness {

using nlohmann::json;

namespace {

// Shortest round-trip text of a double, as JSON prints it.
std::string num(double v) { return json(v).dump(); }

template <typename T>
T req(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("report: missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("report: field '") + key + "' has the wrong type");
  }
}

}  // namespace

json report_to_json(const RunReport& r) {
  json rows = json::array();
  for (const auto& m : r.rows) {
    rows.push_back({{"method", m.method},
                    {"granularities", m.granularities},
                    {"iterations", m.iterations},
                    {"stop_reason", m.stop_reason},
                    {"sparsity", m.sparsity},
                    {"baseline_accuracy", m.baseline_accuracy},
                    {"prune_accuracy", m.prune_accuracy},
                    {"final_accuracy", m.final_accuracy},
                    {"weight_xbars_unpruned", m.weight_xbars_unpruned},
                    {"weight_xbars_pruned", m.weight_xbars_pruned},
                    {"act_xbars_unpruned", m.act_xbars_unpruned},
                    {"act_xbars_pruned", m.act_xbars_pruned},
                    {"savings_fraction", m.savings_fraction},
                    {"budget", m.budget},
                    {"iso_area_speedup", m.iso_area_speedup},
                    {"checkpoint", m.checkpoint}});
  }
  return {{"config_hash", r.config_hash},
          {"init_seed", r.init_seed},
          {"train_seed", r.train_seed},
          {"started_at", r.started_at},
          {"finished_at", r.finished_at},
          {"methods", std::move(rows)}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.config_hash = req<std::string>(j, "config_hash");
  r.init_seed = req<std::uint64_t>(j, "init_seed");
  r.train_seed = req<std::uint64_t>(j, "train_seed");
  r.started_at = req<std::string>(j, "started_at");
  r.finished_at = req<std::string>(j, "finished_at");
  for (const auto& e : req<json>(j, "methods")) {
    MethodRow m;
    m.method = req<std::string>(e, "method");
    m.granularities = req<std::string>(e, "granularities");
    m.iterations = req<std::size_t>(e, "iterations");
    m.stop_reason = req<std::string>(e, "stop_reason");
    m.sparsity = req<double>(e, "sparsity");
    m.baseline_accuracy = req<double>(e, "baseline_accuracy");
    m.prune_accuracy = req<double>(e, "prune_accuracy");
    m.final_accuracy = req<double>(e, "final_accuracy");
    m.weight_xbars_unpruned = req<std::size_t>(e, "weight_xbars_unpruned");
    m.weight_xbars_pruned = req<std::size_t>(e, "weight_xbars_pruned");
    m.act_xbars_unpruned = req<std::size_t>(e, "act_xbars_unpruned");
    m.act_xbars_pruned = req<std::size_t>(e, "act_xbars_pruned");
    m.savings_fraction = req<double>(e, "savings_fraction");
    m.budget = req<std::size_t>(e, "budget");
    m.iso_area_speedup = req<double>(e, "iso_area_speedup");
    m.checkpoint = req<std::string>(e, "checkpoint");
    r.rows.push_back(std::move(m));
  }
  return r;
}

void write_report_csv(std::ostream& os, const RunReport& r) {
  os << "method,granularities,iterations,stop_reason,sparsity,baseline_accuracy,"
        "prune_accuracy,final_accuracy,weight_xbars_unpruned,weight_xbars_pruned,"
        "act_xbars_unpruned,act_xbars_pruned,savings_fraction,budget,"
        "iso_area_speedup,config_hash,init_seed\n";
  for (const auto& m : r.rows) {
    os << m.method << ',' << m.granularities << ',' << m.iterations << ','
       << m.stop_reason << ',' << num(m.sparsity) << ',' << num(m.baseline_accuracy) << ','
       << num(m.prune_accuracy) << ',' << num(m.final_accuracy) << ','
       << m.weight_xbars_unpruned << ',' << m.weight_xbars_pruned << ','
       << m.act_xbars_unpruned << ',' << m.act_xbars_pruned << ','
       << num(m.savings_fraction) << ',' << m.budget << ',' << num(m.iso_area_speedup)
       << ',' << r.config_hash << ',' << r.init_seed << '\n';
  }
}

void emit_report(const RunReport& r, const std::string& format,
                 const std::filesystem::path& path) {
  if (format != "json" && format != "csv") {
    throw InvalidInput("unknown report format '" + format + "' (json or csv)");
  }
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write report " + path.string());
  if (format == "json") {
    os << report_to_json(r).dump(2) << '\n';
  } else {
    write_report_csv(os, r);
  }
  if (!os) throw InvalidInput("failed writing report " + path.string());
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace xbarprune::harness
