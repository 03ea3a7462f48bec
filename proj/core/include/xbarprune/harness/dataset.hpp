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
#include <vector>

#include "xbarprune/harness/config.hpp"
#include "xbarprune/nn/train.hpp"

namespace xbarprune::harness {

struct DatasetPair {
  nn::Dataset train;
  nn::Dataset test;
};

/// MNIST IDX pair: images (magic 0x00000803, dims n, rows, cols) and labels
/// (magic 0x00000801, dim n), big-endian headers, u8 payload. Pixels are
/// scaled to [0, 1]. Throws FormatError with the offending byte offset.
nn::Dataset read_mnist(const std::filesystem::path& images,
                       const std::filesystem::path& labels);

/// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes
/// (1024 R, 1024 G, 1024 B, row-major 32x32).
nn::Dataset read_cifar10(const std::vector<std::filesystem::path>& batches);

/// Gaussian blobs: one random center per class, samples are center plus
/// `noise` * N(0, 1) per pixel. Centers depend on `seed` only; samples on
/// (`seed`, `stream`), so train and test use different streams.
nn::Dataset make_blobs(std::size_t n, std::size_t classes, std::size_t side,
                       double noise, std::uint64_t seed, std::uint64_t stream = 0);

/// The first k indices of a seeded Fisher-Yates shuffle of 0..n-1
/// (k = 0 means all n). Throws InvalidInput when k > n.
std::vector<std::size_t> subset_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Explicit path, else $XBARPRUNE_DATA/<name>, else ./data/<name>.
std::filesystem::path resolve_data_dir(const DatasetConfig& cfg);

/// Loads train and test splits and draws the configured subsets.
DatasetPair load_dataset(const DatasetConfig& cfg);

}  // namespace xbarprune::harness
