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

#include "xbarprune/harness/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <span>

#include "xbarprune/errors.hpp"
#include "xbarprune/rng.hpp"

namespace xbarprune::harness {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw InvalidInput("cannot open dataset file " + p.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off, const fs::path& p) {
  if (off + 4 > b.size()) {
    throw FormatError(p.string() + ": truncated header", off);
  }
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace

nn::Dataset read_mnist(const fs::path& images, const fs::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  if (be32(img, 0, images) != 0x803) throw FormatError(images.string() + ": bad IDX3 magic", 0);
  if (be32(lab, 0, labels) != 0x801) throw FormatError(labels.string() + ": bad IDX1 magic", 0);
  const std::size_t n = be32(img, 4, images);
  const std::size_t rows = be32(img, 8, images);
  const std::size_t cols = be32(img, 12, images);
  const std::size_t nl = be32(lab, 4, labels);
  if (nl != n) {
    throw FormatError(labels.string() + ": label count " + std::to_string(nl) +
                          " differs from image count " + std::to_string(n),
                      4);
  }
  const std::size_t want_img = 16 + n * rows * cols;
  if (img.size() != want_img) {
    throw FormatError(images.string() + ": expected " + std::to_string(want_img) +
                          " bytes, found " + std::to_string(img.size()),
                      std::min(img.size(), want_img));
  }
  if (lab.size() != 8 + n) {
    throw FormatError(labels.string() + ": expected " + std::to_string(8 + n) +
                          " bytes, found " + std::to_string(lab.size()),
                      std::min(lab.size(), 8 + n));
  }
  nn::Dataset d;
  d.num_classes = 10;
  d.images = nn::Tensor4({n, 1, rows, cols});
  for (std::size_t i = 0; i < n * rows * cols; ++i) d.images[i] = img[16 + i] / 255.0f;
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[8 + i] > 9) {
      throw FormatError(labels.string() + ": label " + std::to_string(lab[8 + i]) +
                            " out of range",
                        8 + i);
    }
    d.labels[i] = lab[8 + i];
  }
  return d;
}

nn::Dataset read_cifar10(const std::vector<fs::path>& batches) {
  constexpr std::size_t kRecord = 3073;
  std::vector<std::vector<std::uint8_t>> files;
  std::size_t n = 0;
  for (const auto& p : batches) {
    auto b = read_file(p);
    if (b.size() % kRecord != 0) {
      throw FormatError(p.string() + ": size " + std::to_string(b.size()) +
                            " is not a multiple of the 3073-byte record",
                        b.size() - b.size() % kRecord);
    }
    n += b.size() / kRecord;
    files.push_back(std::move(b));
  }
  nn::Dataset d;
  d.num_classes = 10;
  d.images = nn::Tensor4({n, 3, 32, 32});
  d.labels.reserve(n);
  std::size_t s = 0;
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& b = files[f];
    for (std::size_t off = 0; off < b.size(); off += kRecord, ++s) {
      if (b[off] > 9) {
        throw FormatError(batches[f].string() + ": label out of range", off);
      }
      d.labels.push_back(b[off]);
      for (std::size_t i = 0; i < 3072; ++i) d.images[s * 3072 + i] = b[off + 1 + i] / 255.0f;
    }
  }
  return d;
}

nn::Dataset make_blobs(std::size_t n, std::size_t classes, std::size_t side, double noise,
                       std::uint64_t seed, std::uint64_t stream) {
  if (classes == 0 || side == 0) throw InvalidInput("blobs need classes and side > 0");
  const std::size_t dim = side * side;
  // Centers depend on the seed only, so every sample stream shares them.
  Rng centers(mix_seed(seed, 0));
  std::vector<float> c(classes * dim);
  for (auto& v : c) v = static_cast<float>(centers.normal());
  Rng rng(mix_seed(seed, stream + 1));
  nn::Dataset d;
  d.num_classes = classes;
  d.images = nn::Tensor4({n, 1, side, side});
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.below(classes);
    d.labels[i] = static_cast<int>(k);
    for (std::size_t j = 0; j < dim; ++j) {
      d.images[i * dim + j] = c[k * dim + j] + static_cast<float>(noise * rng.normal());
    }
  }
  return d;
}

std::vector<std::size_t> subset_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k > n) {
    throw InvalidInput("subset of " + std::to_string(k) + " requested from " +
                       std::to_string(n) + " samples");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  if (k != 0) idx.resize(k);
  return idx;
}

fs::path resolve_data_dir(const DatasetConfig& cfg) {
  if (!cfg.path.empty()) return cfg.path;
  if (const char* root = std::getenv("XBARPRUNE_DATA"); root && *root) {
    return fs::path(root) / cfg.name;
  }
  return fs::path("data") / cfg.name;
}

DatasetPair load_dataset(const DatasetConfig& cfg) {
  DatasetPair out;
  if (cfg.name == "synthetic-blobs") {
    out.train = make_blobs(cfg.blob_train, cfg.blob_classes, cfg.blob_side, cfg.blob_noise,
                           cfg.seed, 1);
    out.test = make_blobs(cfg.blob_test, cfg.blob_classes, cfg.blob_side, cfg.blob_noise,
                          cfg.seed, 2);
    return out;
  }

  const fs::path dir = resolve_data_dir(cfg);
  nn::Dataset train, test;
  if (cfg.name == "mnist") {
    train = read_mnist(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    test = read_mnist(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  } else if (cfg.name == "cifar10") {
    std::vector<fs::path> tr;
    for (int i = 1; i <= 5; ++i) tr.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
    train = read_cifar10(tr);
    test = read_cifar10({dir / "test_batch.bin"});
  } else {
    throw InvalidInput("unknown dataset '" + cfg.name + "'");
  }
  out.train = train.subset(subset_indices(train.size(), cfg.train_subset,
                                          mix_seed(cfg.seed, 1)));
  out.test = test.subset(subset_indices(test.size(), cfg.test_subset, mix_seed(cfg.seed, 2)));
  return out;
}

}  // namespace xbarprune::harness
