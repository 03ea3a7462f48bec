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

#include "xbarprune/nn/model.hpp"

#include <algorithm>

#include "xbarprune/errors.hpp"

namespace xbarprune::nn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string at(std::size_t i) { return "layer " + std::to_string(i) + ": "; }

}  // namespace

std::size_t ConvSpec::out_dim(std::size_t in) const {
  if (stride == 0 || in + 2 * pad < k) return 0;
  return (in + 2 * pad - k) / stride + 1;
}

std::string layer_kind_name(const LayerDef& layer) {
  return std::visit(Overloaded{
                        [](const ConvSpec&) { return "conv"; },
                        [](const LinearSpec&) { return "linear"; },
                        [](const ReluSpec&) { return "relu"; },
                        [](const MaxPoolSpec&) { return "maxpool"; },
                        [](const ResidualAddSpec&) { return "residual_add"; },
                        [](const FlattenSpec&) { return "flatten"; },
                    },
                    layer);
}

Dims4 weight_dims(const LayerDef& layer) {
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    return {c->oc, c->ic, c->k, c->k};
  }
  if (const auto* l = std::get_if<LinearSpec>(&layer)) {
    return {l->out, l->in, 1, 1};
  }
  throw InvalidInput(layer_kind_name(layer) + " layer has no weights");
}

template <typename T>
BasicModel<T>::BasicModel(Shape3 input_shape, std::vector<LayerDef> layers)
    : input_shape_(input_shape), layers_(std::move(layers)) {
  input_shape_.n = 1;
  if (input_shape_.per_sample() == 0) {
    throw InvalidInput("model input shape " + input_shape_.str() + " is empty");
  }
  if (layers_.empty()) throw InvalidInput("model has no layers");

  Shape3 cur = input_shape_;
  shapes_.reserve(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerDef& def = layers_[i];
    Shape3 next = cur;
    if (const auto* c = std::get_if<ConvSpec>(&def)) {
      if (c->ic == 0 || c->oc == 0 || c->k == 0 || c->stride == 0) {
        throw InvalidInput(at(i) + "conv with zero extent");
      }
      if (cur.c != c->ic) {
        throw InvalidInput(at(i) + "conv expects " + std::to_string(c->ic) +
                           " input channels, got " + std::to_string(cur.c));
      }
      const std::size_t oh = c->out_dim(cur.h), ow = c->out_dim(cur.w);
      if (oh == 0 || ow == 0) {
        throw InvalidInput(at(i) + "conv kernel larger than padded input");
      }
      next = {1, c->oc, oh, ow};
    } else if (const auto* l = std::get_if<LinearSpec>(&def)) {
      if (l->in == 0 || l->out == 0) {
        throw InvalidInput(at(i) + "linear with zero extent");
      }
      if (cur.per_sample() != l->in) {
        throw InvalidInput(at(i) + "linear expects " + std::to_string(l->in) +
                           " features, got " +
                           std::to_string(cur.per_sample()));
      }
      next = {1, l->out, 1, 1};
    } else if (const auto* p = std::get_if<MaxPoolSpec>(&def)) {
      if (p->k == 0 || p->stride == 0 || cur.h < p->k || cur.w < p->k) {
        throw InvalidInput(at(i) + "maxpool window does not fit");
      }
      next = {1, cur.c, (cur.h - p->k) / p->stride + 1,
              (cur.w - p->k) / p->stride + 1};
    } else if (const auto* r = std::get_if<ResidualAddSpec>(&def)) {
      if (r->from >= i) {
        throw InvalidInput(at(i) + "residual source must precede the add");
      }
      if (!(shapes_[r->from] == cur)) {
        throw InvalidInput(at(i) + "residual source dims " +
                           shapes_[r->from].str() + " differ from " +
                           cur.str());
      }
    } else if (std::holds_alternative<FlattenSpec>(def)) {
      next = {1, cur.per_sample(), 1, 1};
    }
    shapes_.push_back(next);
    cur = next;

    if (is_trainable(def)) {
      trainable_.push_back(i);
      const Dims4 wd = weight_dims(def);
      weights_.emplace_back(wd);
      masks_.emplace_back(wd, true);
    }
  }
  if (trainable_.empty()) throw InvalidInput("model has no trainable layer");
  if (cur.h != 1 || cur.w != 1) {
    throw InvalidInput("model output must be (classes, 1, 1), got " +
                       cur.str());
  }
}

template <typename T>
std::optional<std::size_t> BasicModel<T>::trainable_slot(
    std::size_t layer) const {
  const auto it = std::find(trainable_.begin(), trainable_.end(), layer);
  if (it == trainable_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - trainable_.begin());
}

template <typename T>
std::size_t BasicModel<T>::total_weights() const {
  std::size_t n = 0;
  for (const auto& m : masks_) n += m.size();
  return n;
}

template <typename T>
std::size_t BasicModel<T>::kept_weights() const {
  std::size_t n = 0;
  for (const auto& m : masks_) n += m.kept_count();
  return n;
}

template <typename T>
double BasicModel<T>::sparsity() const {
  const std::size_t total = total_weights();
  if (total == 0) return 0.0;
  return 1.0 - static_cast<double>(kept_weights()) / static_cast<double>(total);
}

template <typename T>
void BasicModel<T>::apply_masks() {
  for (std::size_t t = 0; t < weights_.size(); ++t) {
    auto& w = weights_[t];
    const auto& m = masks_[t];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!m.kept(i)) w[i] = T{0};
    }
  }
}

template <typename T>
bool BasicModel<T>::masks_respected() const {
  for (std::size_t t = 0; t < weights_.size(); ++t) {
    const auto& w = weights_[t];
    const auto& m = masks_[t];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!m.kept(i) && w[i] != T{0}) return false;
    }
  }
  return true;
}

template <typename T>
std::size_t output_positions(const BasicModel<T>& model, std::size_t t) {
  const Shape3& s = model.output_shape(model.layer_of(t));
  return s.h * s.w;
}

template class BasicModel<float>;
template class BasicModel<double>;
template std::size_t output_positions(const BasicModel<float>&, std::size_t);
template std::size_t output_positions(const BasicModel<double>&, std::size_t);

}  // namespace xbarprune::nn
