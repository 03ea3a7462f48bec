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

// Pruning groups. Every group is a set of flat weight indices inside one
// trainable layer; pruning a group clears all of them at once. Groups are
// described in the crossbar matrix view (rows = ic*k*k, cols = oc), where
// linear layers behave like 1x1 convolutions.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xbarprune/nn/model.hpp"

namespace xbarprune::pruner {

enum class GranularityKind { Filter, Channel, Index, Unstructured, ColumnGroup, BlockGroup };

struct Granularity {
  GranularityKind kind = GranularityKind::Filter;
  /// Block height (matrix rows) and width (matrix columns), BlockGroup only.
  std::size_t bh = 1;
  std::size_t bw = 1;

  static Granularity filter() { return {GranularityKind::Filter}; }
  static Granularity channel() { return {GranularityKind::Channel}; }
  static Granularity index() { return {GranularityKind::Index}; }
  static Granularity unstructured() { return {GranularityKind::Unstructured}; }
  static Granularity column_group() { return {GranularityKind::ColumnGroup}; }
  static Granularity block_group(std::size_t bh, std::size_t bw) {
    return {GranularityKind::BlockGroup, bh, bw};
  }

  /// "filter", "channel", "index", "unstructured", "column", "block(BHxBW)".
  std::string name() const;
  /// Inverse of name(); throws InvalidInput.
  static Granularity parse(const std::string& s);

  bool operator==(const Granularity&) const = default;
};

struct Group {
  std::size_t slot = 0;   ///< trainable layer
  std::size_t index = 0;  ///< position within the layer's enumeration
  std::vector<std::size_t> members;  ///< flat weight indices
  std::size_t kept = 0;   ///< members still kept
  double score = 0.0;     ///< mean |w| over kept members
};

/// Every group of every trainable layer, ordered by (slot, index), with
/// kept counts and scores filled in. Index groups are scoped to one
/// crossbar column band, hence `xbar_size`.
///
/// Per-layer enumeration order:
///   Filter / ColumnGroup: oc
///   Channel:              oc * ic_count + ic
///   Index:                row * col_bands + band
///   Unstructured:         flat weight index
///   BlockGroup:           row_block * col_blocks + col_block
std::vector<Group> enumerate_groups(const nn::Model& model, const Granularity& g,
                                    std::size_t xbar_size = 128);

/// Groups with at least one kept member. Throws DegenerateModel when no
/// weight is kept anywhere.
std::vector<Group> group_scores(const nn::Model& model, const Granularity& g,
                                std::size_t xbar_size = 128);

}  // namespace xbarprune::pruner
