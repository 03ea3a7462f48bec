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

#include "xbarprune/pruner/groups.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "xbarprune/errors.hpp"

namespace xbarprune::pruner {

std::string Granularity::name() const {
  switch (kind) {
    case GranularityKind::Filter: return "filter";
    case GranularityKind::Channel: return "channel";
    case GranularityKind::Index: return "index";
    case GranularityKind::Unstructured: return "unstructured";
    case GranularityKind::ColumnGroup: return "column";
    case GranularityKind::BlockGroup:
      return "block(" + std::to_string(bh) + "x" + std::to_string(bw) + ")";
  }
  return "?";
}

Granularity Granularity::parse(const std::string& s) {
  if (s == "filter") return filter();
  if (s == "channel") return channel();
  if (s == "index") return index();
  if (s == "unstructured") return unstructured();
  if (s == "column") return column_group();
  std::size_t bh = 0, bw = 0;
  char close = 0;
  if (std::sscanf(s.c_str(), "block(%zux%zu%c", &bh, &bw, &close) == 3 && close == ')' &&
      bh > 0 && bw > 0) {
    return block_group(bh, bw);
  }
  throw InvalidInput("unknown granularity '" + s + "'");
}

namespace {

// Appends the groups of one layer whose weights have dims (oc, ic, k, k).
void layer_groups(std::size_t slot, const nn::Dims4& d, const Granularity& g,
                  std::size_t xbar_size, std::vector<Group>& out) {
  const std::size_t oc = d.n, ic = d.c, kk = d.h * d.w;
  const std::size_t rows = ic * kk, cols = oc;
  auto emit = [&](std::size_t index, std::vector<std::size_t> members) {
    Group grp;
    grp.slot = slot;
    grp.index = index;
    grp.members = std::move(members);
    out.push_back(std::move(grp));
  };
  switch (g.kind) {
    case GranularityKind::Filter:
    case GranularityKind::ColumnGroup:
      for (std::size_t c = 0; c < cols; ++c) {
        std::vector<std::size_t> m(rows);
        for (std::size_t r = 0; r < rows; ++r) m[r] = c * rows + r;
        emit(c, std::move(m));
      }
      break;
    case GranularityKind::Channel:
      for (std::size_t o = 0; o < oc; ++o) {
        for (std::size_t i = 0; i < ic; ++i) {
          std::vector<std::size_t> m(kk);
          for (std::size_t j = 0; j < kk; ++j) m[j] = o * rows + i * kk + j;
          emit(o * ic + i, std::move(m));
        }
      }
      break;
    case GranularityKind::Index: {
      if (xbar_size == 0) throw InvalidInput("crossbar size must be positive");
      const std::size_t bands = (cols + xbar_size - 1) / xbar_size;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t b = 0; b < bands; ++b) {
          const std::size_t c1 = std::min(cols, (b + 1) * xbar_size);
          std::vector<std::size_t> m;
          m.reserve(c1 - b * xbar_size);
          for (std::size_t c = b * xbar_size; c < c1; ++c) m.push_back(c * rows + r);
          emit(r * bands + b, std::move(m));
        }
      }
      break;
    }
    case GranularityKind::Unstructured:
      for (std::size_t i = 0; i < rows * cols; ++i) emit(i, {i});
      break;
    case GranularityKind::BlockGroup: {
      if (g.bh == 0 || g.bw == 0) throw InvalidInput("block dims must be positive");
      const std::size_t rb = (rows + g.bh - 1) / g.bh;
      const std::size_t cb = (cols + g.bw - 1) / g.bw;
      for (std::size_t a = 0; a < rb; ++a) {
        for (std::size_t b = 0; b < cb; ++b) {
          std::vector<std::size_t> m;
          for (std::size_t r = a * g.bh; r < std::min(rows, (a + 1) * g.bh); ++r) {
            for (std::size_t c = b * g.bw; c < std::min(cols, (b + 1) * g.bw); ++c) {
              m.push_back(c * rows + r);
            }
          }
          emit(a * cb + b, std::move(m));
        }
      }
      break;
    }
  }
}

}  // namespace

std::vector<Group> enumerate_groups(const nn::Model& model, const Granularity& g,
                                    std::size_t xbar_size) {
  std::vector<Group> out;
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const auto& w = model.weights()[t];
    const auto& mask = model.masks()[t];
    const std::size_t first = out.size();
    layer_groups(t, w.dims(), g, xbar_size, out);
    for (std::size_t i = first; i < out.size(); ++i) {
      Group& grp = out[i];
      double sum = 0.0;
      for (std::size_t idx : grp.members) {
        if (mask.kept(idx)) {
          ++grp.kept;
          sum += std::abs(static_cast<double>(w[idx]));
        }
      }
      grp.score = grp.kept ? sum / static_cast<double>(grp.kept) : 0.0;
    }
  }
  return out;
}

std::vector<Group> group_scores(const nn::Model& model, const Granularity& g,
                                std::size_t xbar_size) {
  if (model.kept_weights() == 0) {
    throw DegenerateModel("no kept weights left to score");
  }
  auto all = enumerate_groups(model, g, xbar_size);
  std::erase_if(all, [](const Group& grp) { return grp.kept == 0; });
  return all;
}

}  // namespace xbarprune::pruner
