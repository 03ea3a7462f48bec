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
#include <filesystem>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

namespace xbarprune::harness {

/// One pruning method's results.
struct MethodRow {
  std::string method;
  /// Granularities used, joined with '>' (e.g. "filter>channel>index").
  std::string granularities;
  std::size_t iterations = 0;
  std::string stop_reason;
  double sparsity = 0.0;
  double baseline_accuracy = 0.0;
  double prune_accuracy = 0.0;  ///< E-epoch retrain of the returned mask
  double final_accuracy = 0.0;  ///< F-epoch retrain of the returned mask
  std::size_t weight_xbars_unpruned = 0;
  std::size_t weight_xbars_pruned = 0;
  std::size_t act_xbars_unpruned = 0;
  std::size_t act_xbars_pruned = 0;
  double savings_fraction = 0.0;
  std::size_t budget = 0;
  double iso_area_speedup = 1.0;
  std::string checkpoint;  ///< file name of the mask checkpoint, if written

  bool operator==(const MethodRow&) const = default;
};

struct RunReport {
  std::string config_hash;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::string started_at;   ///< ISO-8601 UTC
  std::string finished_at;
  std::vector<MethodRow> rows;

  bool operator==(const RunReport&) const = default;
};

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);

/// Header plus one line per row; the header alone for an empty report.
void write_report_csv(std::ostream& os, const RunReport& r);

/// Writes JSON ("json") or CSV ("csv") to `path`. Throws InvalidInput for
/// an unknown format or an unwritable path.
void emit_report(const RunReport& r, const std::string& format,
                 const std::filesystem::path& path);

/// Current time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace xbarprune::harness
