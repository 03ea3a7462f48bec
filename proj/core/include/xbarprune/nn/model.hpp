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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xbarprune/nn/tensor.hpp"

namespace xbarprune::nn {

struct ConvSpec {
  std::size_t ic = 1;
  std::size_t oc = 1;
  std::size_t k = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t weight_count() const { return oc * ic * k * k; }
  /// floor((in + 2 pad - k) / stride) + 1, or 0 when the kernel does not fit.
  std::size_t out_dim(std::size_t in) const;
  bool operator==(const ConvSpec&) const = default;
};

struct LinearSpec {
  std::size_t in = 1;
  std::size_t out = 1;
  bool operator==(const LinearSpec&) const = default;
};

struct ReluSpec {
  bool operator==(const ReluSpec&) const = default;
};

struct MaxPoolSpec {
  std::size_t k = 2;
  std::size_t stride = 2;
  bool operator==(const MaxPoolSpec&) const = default;
};

/// Adds the output of an earlier layer (by index) to the current tensor.
struct ResidualAddSpec {
  std::size_t from = 0;
  bool operator==(const ResidualAddSpec&) const = default;
};

struct FlattenSpec {
  bool operator==(const FlattenSpec&) const = default;
};

using LayerDef = std::variant<ConvSpec, LinearSpec, ReluSpec, MaxPoolSpec,
                              ResidualAddSpec, FlattenSpec>;

std::string layer_kind_name(const LayerDef& layer);

inline bool is_trainable(const LayerDef& layer) {
  return std::holds_alternative<ConvSpec>(layer) ||
         std::holds_alternative<LinearSpec>(layer);
}

/// Weight tensor dims of a trainable layer: (oc, ic, k, k) for conv,
/// (out, in, 1, 1) for linear.
Dims4 weight_dims(const LayerDef& layer);

/// Per-sample activation shape (c, h, w); n is always 1.
using Shape3 = Dims4;

/// A layer chain with one weight tensor and one mask per trainable layer.
/// Pruned weights hold exactly zero.
template <typename T>
class BasicModel {
 public:
  BasicModel() = default;
  /// Validates the chain; throws InvalidInput on inconsistent shapes.
  BasicModel(Shape3 input_shape, std::vector<LayerDef> layers);

  const Shape3& input_shape() const { return input_shape_; }
  const std::vector<LayerDef>& layers() const { return layers_; }
  /// Output shape of layer i.
  const Shape3& output_shape(std::size_t i) const { return shapes_[i]; }
  /// Input shape of layer i.
  const Shape3& input_shape_of(std::size_t i) const {
    return i == 0 ? input_shape_ : shapes_[i - 1];
  }
  std::size_t num_classes() const { return shapes_.back().c; }

  std::size_t num_trainable() const { return trainable_.size(); }
  /// Index into layers() of trainable layer t.
  std::size_t layer_of(std::size_t t) const { return trainable_[t]; }
  /// Trainable slot of layer i, if it is trainable.
  std::optional<std::size_t> trainable_slot(std::size_t layer) const;

  std::vector<BasicTensor4<T>>& weights() { return weights_; }
  const std::vector<BasicTensor4<T>>& weights() const { return weights_; }
  std::vector<PruneMask>& masks() { return masks_; }
  const std::vector<PruneMask>& masks() const { return masks_; }

  std::size_t total_weights() const;
  std::size_t kept_weights() const;
  /// Fraction of all weights pruned.
  double sparsity() const;

  /// Zeroes every pruned position.
  void apply_masks();
  /// True iff every pruned position holds exactly zero.
  bool masks_respected() const;

  /// Same layers and masks, weights converted to U.
  template <typename U>
  BasicModel<U> cast() const;

 private:
  template <typename U>
  friend class BasicModel;

  Shape3 input_shape_;
  std::vector<LayerDef> layers_;
  std::vector<Shape3> shapes_;
  std::vector<std::size_t> trainable_;
  std::vector<BasicTensor4<T>> weights_;
  std::vector<PruneMask> masks_;
};

using Model = BasicModel<float>;

/// Output positions (O x O for conv, 1 for linear) of trainable layer t:
/// the number of MVM windows per image and the activation cells per
/// output channel.
template <typename T>
std::size_t output_positions(const BasicModel<T>& model, std::size_t t);

template <typename T>
template <typename U>
BasicModel<U> BasicModel<T>::cast() const {
  BasicModel<U> out;
  out.input_shape_ = input_shape_;
  out.layers_ = layers_;
  out.shapes_ = shapes_;
  out.trainable_ = trainable_;
  out.masks_ = masks_;
  out.weights_.reserve(weights_.size());
  for (const auto& w : weights_) {
    BasicTensor4<U> c(w.dims());
    for (std::size_t i = 0; i < w.size(); ++i) c[i] = static_cast<U>(w[i]);
    out.weights_.push_back(std::move(c));
  }
  return out;
}

}  // namespace xbarprune::nn
