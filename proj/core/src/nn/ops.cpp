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

#include "xbarprune/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "xbarprune/errors.hpp"
#include "xbarprune/rng.hpp"

namespace xbarprune::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

// cols is (ic*k*k) x (n*oh*ow), row-major. Every element is written once.
template <typename T>
void im2col(const BasicTensor4<T>& in, const ConvSpec& cs, std::size_t oh,
            std::size_t ow, std::vector<T>& cols) {
  const Dims4& d = in.dims();
  const std::size_t positions = oh * ow;
  const std::size_t ncol = d.n * positions;
  cols.resize(cs.ic * cs.k * cs.k * ncol);
  const auto H = static_cast<std::ptrdiff_t>(d.h), W = static_cast<std::ptrdiff_t>(d.w);
  const auto pad = static_cast<std::ptrdiff_t>(cs.pad);
  for (std::size_t c = 0; c < cs.ic; ++c) {
    for (std::size_t ki = 0; ki < cs.k; ++ki) {
      for (std::size_t kj = 0; kj < cs.k; ++kj) {
        T* row = cols.data() + ((c * cs.k + ki) * cs.k + kj) * ncol;
        // Output columns [x0, x1) read inside the image (stride 1 case).
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kj) - pad;
        const auto x0 = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(-shift, 0, ow));
        const auto x1 = static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(W - shift, static_cast<std::ptrdiff_t>(x0), ow));
        for (std::size_t s = 0; s < d.n; ++s) {
          const T* plane = in.data() + in.offset(s, c, 0, 0);
          T* dst = row + s * positions;
          for (std::size_t y = 0; y < oh; ++y, dst += ow) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * cs.stride + ki) - pad;
            if (iy < 0 || iy >= H) {
              std::fill_n(dst, ow, T{0});
              continue;
            }
            const T* src = plane + iy * W;
            if (cs.stride == 1) {
              std::fill(dst, dst + x0, T{0});
              std::copy(src + (static_cast<std::ptrdiff_t>(x0) + shift),
                        src + (static_cast<std::ptrdiff_t>(x1) + shift), dst + x0);
              std::fill(dst + x1, dst + ow, T{0});
              continue;
            }
            for (std::size_t x = 0; x < ow; ++x) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * cs.stride) + shift;
              dst[x] = (ix < 0 || ix >= W) ? T{0} : src[ix];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, const ConvSpec& cs, std::size_t oh, std::size_t ow,
            BasicTensor4<T>& grad_in) {
  const Dims4& d = grad_in.dims();
  const std::size_t positions = oh * ow;
  const std::size_t ncol = d.n * positions;
  for (std::size_t c = 0; c < cs.ic; ++c) {
    for (std::size_t ki = 0; ki < cs.k; ++ki) {
      for (std::size_t kj = 0; kj < cs.k; ++kj) {
        const T* row = cols + ((c * cs.k + ki) * cs.k + kj) * ncol;
        for (std::size_t s = 0; s < d.n; ++s) {
          T* plane = grad_in.data() + grad_in.offset(s, c, 0, 0);
          const T* src = row + s * positions;
          for (std::size_t y = 0; y < oh; ++y) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * cs.stride + ki) -
                                      static_cast<std::ptrdiff_t>(cs.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
            for (std::size_t x = 0; x < ow; ++x) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(x * cs.stride + kj) -
                  static_cast<std::ptrdiff_t>(cs.pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
              plane[iy * d.w + ix] += src[y * ow + x];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void accumulate(BasicTensor4<T>& dst, BasicTensor4<T>&& src) {
  if (dst.size() == 0) {
    dst = std::move(src);
    return;
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void mask_gradient(BasicTensor4<T>& g, const PruneMask& m) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m.kept(i)) g[i] = T{0};
  }
}

}  // namespace

double xavier_bound(const LayerDef& layer) {
  double fan_in = 0.0, fan_out = 0.0;
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    fan_in = static_cast<double>(c->ic * c->k * c->k);
    fan_out = static_cast<double>(c->oc * c->k * c->k);
  } else if (const auto* l = std::get_if<LinearSpec>(&layer)) {
    fan_in = static_cast<double>(l->in);
    fan_out = static_cast<double>(l->out);
  } else {
    throw InvalidInput("xavier_bound on non-trainable " +
                       layer_kind_name(layer) + " layer");
  }
  if (fan_in + fan_out <= 0.0) throw DegenerateModel("layer with zero fan");
  return std::sqrt(6.0 / (fan_in + fan_out));
}

template <typename T>
void xavier_init(BasicModel<T>& model, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    const double b = xavier_bound(model.layers()[model.layer_of(t)]);
    auto& w = model.weights()[t];
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = static_cast<T>(rng.uniform(-b, b));
    }
  }
  model.apply_masks();
}

template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model,
                         const BasicTensor4<T>& batch) {
  const Shape3& in_shape = model.input_shape();
  const Dims4& bd = batch.dims();
  if (bd.n == 0 || bd.c != in_shape.c || bd.h != in_shape.h ||
      bd.w != in_shape.w) {
    throw InvalidInput("batch dims " + bd.str() + " do not match model input " +
                       in_shape.str());
  }
  const auto& layers = model.layers();
  const std::size_t n = bd.n;

  ForwardResult<T> result;
  ForwardCache<T>& cache = result.cache;
  cache.model = &model;
  cache.batch = n;
  cache.inputs.reserve(layers.size() + 1);
  cache.inputs.push_back(batch);
  cache.columns.resize(layers.size());
  cache.argmax.resize(layers.size());

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const BasicTensor4<T>& x = cache.inputs[i];
    const Shape3& os = model.output_shape(i);
    BasicTensor4<T> y(Dims4{n, os.c, os.h, os.w});

    if (const auto* cs = std::get_if<ConvSpec>(&layers[i])) {
      const std::size_t positions = os.h * os.w;
      const std::size_t ncol = n * positions;
      const std::size_t rows = cs->ic * cs->k * cs->k;
      auto& cols = cache.columns[i];
      im2col(x, *cs, os.h, os.w, cols);
      const auto& w = model.weights()[*model.trainable_slot(i)];
      ConstMapMat<T> wm(w.data(), cs->oc, rows);
      ConstMapMat<T> cm(cols.data(), rows, ncol);
      RowMat<T> out = wm * cm;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < cs->oc; ++o) {
          std::copy_n(out.data() + o * ncol + s * positions, positions,
                      y.data() + y.offset(s, o, 0, 0));
        }
      }
    } else if (const auto* ls = std::get_if<LinearSpec>(&layers[i])) {
      const auto& w = model.weights()[*model.trainable_slot(i)];
      ConstMapMat<T> xm(x.data(), n, ls->in);
      ConstMapMat<T> wm(w.data(), ls->out, ls->in);
      MapMat<T> ym(y.data(), n, ls->out);
      ym.noalias() = xm * wm.transpose();
    } else if (std::holds_alternative<ReluSpec>(layers[i])) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        y[j] = x[j] > T{0} ? x[j] : T{0};
      }
    } else if (const auto* ps = std::get_if<MaxPoolSpec>(&layers[i])) {
      const Dims4& xd = x.dims();
      auto& am = cache.argmax[i];
      am.resize(y.size());
      std::size_t out_idx = 0;
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t c = 0; c < os.c; ++c) {
          const std::size_t base = x.offset(s, c, 0, 0);
          for (std::size_t oy = 0; oy < os.h; ++oy) {
            for (std::size_t ox = 0; ox < os.w; ++ox, ++out_idx) {
              std::size_t best = base + (oy * ps->stride) * xd.w + ox * ps->stride;
              for (std::size_t ky = 0; ky < ps->k; ++ky) {
                for (std::size_t kx = 0; kx < ps->k; ++kx) {
                  const std::size_t idx =
                      base + (oy * ps->stride + ky) * xd.w + ox * ps->stride + kx;
                  if (x[idx] > x[best]) best = idx;
                }
              }
              am[out_idx] = static_cast<std::uint32_t>(best);
              y[out_idx] = x[best];
            }
          }
        }
      }
    } else if (const auto* rs = std::get_if<ResidualAddSpec>(&layers[i])) {
      const BasicTensor4<T>& skip = cache.inputs[rs->from + 1];
      for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] + skip[j];
    } else {  // Flatten
      std::copy(x.values().begin(), x.values().end(), y.data());
    }
    cache.inputs.push_back(std::move(y));
  }
  result.logits = cache.inputs.back();
  return result;
}

template <typename T>
Gradients<T> backward(const BasicModel<T>& model, const ForwardCache<T>& cache,
                      const BasicTensor4<T>& loss_grad) {
  const auto& layers = model.layers();
  if (cache.model != &model || cache.inputs.size() != layers.size() + 1) {
    throw InvalidInput("backward: cache was not produced by forward() on this model");
  }
  if (!(loss_grad.dims() == cache.inputs.back().dims())) {
    throw InvalidInput("backward: loss gradient dims " + loss_grad.dims().str() +
                       " do not match logits " +
                       cache.inputs.back().dims().str());
  }
  const std::size_t n = cache.batch;

  Gradients<T> grads;
  grads.weights.reserve(model.num_trainable());
  for (const auto& w : model.weights()) grads.weights.emplace_back(w.dims());

  // gout[i] = d loss / d (output of layer i)
  std::vector<BasicTensor4<T>> gout(layers.size());
  gout.back() = loss_grad;

  for (std::size_t i = layers.size(); i-- > 0;) {
    BasicTensor4<T>& g = gout[i];
    const BasicTensor4<T>& x = cache.inputs[i];
    const bool need_input_grad = i > 0;
    BasicTensor4<T> gin;
    if (g.size() == 0) g = BasicTensor4<T>(cache.inputs[i + 1].dims());

    if (const auto* cs = std::get_if<ConvSpec>(&layers[i])) {
      const Shape3& os = model.output_shape(i);
      const std::size_t positions = os.h * os.w;
      const std::size_t ncol = n * positions;
      const std::size_t rows = cs->ic * cs->k * cs->k;
      const std::size_t slot = *model.trainable_slot(i);
      RowMat<T> dm(cs->oc, ncol);
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < cs->oc; ++o) {
          std::copy_n(g.data() + g.offset(s, o, 0, 0), positions,
                      dm.data() + o * ncol + s * positions);
        }
      }
      const auto& cols = cache.columns[i];
      ConstMapMat<T> cm(cols.data(), rows, ncol);
      MapMat<T> dw(grads.weights[slot].data(), cs->oc, rows);
      dw.noalias() = dm * cm.transpose();
      mask_gradient(grads.weights[slot], model.masks()[slot]);
      if (need_input_grad) {
        ConstMapMat<T> wm(model.weights()[slot].data(), cs->oc, rows);
        RowMat<T> dcols = wm.transpose() * dm;
        gin = BasicTensor4<T>(x.dims());
        col2im(dcols.data(), *cs, os.h, os.w, gin);
      }
    } else if (const auto* ls = std::get_if<LinearSpec>(&layers[i])) {
      const std::size_t slot = *model.trainable_slot(i);
      ConstMapMat<T> xm(x.data(), n, ls->in);
      ConstMapMat<T> gm(g.data(), n, ls->out);
      MapMat<T> dw(grads.weights[slot].data(), ls->out, ls->in);
      dw.noalias() = gm.transpose() * xm;
      mask_gradient(grads.weights[slot], model.masks()[slot]);
      if (need_input_grad) {
        gin = BasicTensor4<T>(x.dims());
        ConstMapMat<T> wm(model.weights()[slot].data(), ls->out, ls->in);
        MapMat<T> gi(gin.data(), n, ls->in);
        gi.noalias() = gm * wm;
      }
    } else if (std::holds_alternative<ReluSpec>(layers[i])) {
      gin = BasicTensor4<T>(x.dims());
      for (std::size_t j = 0; j < x.size(); ++j) {
        gin[j] = x[j] > T{0} ? g[j] : T{0};
      }
    } else if (std::holds_alternative<MaxPoolSpec>(layers[i])) {
      gin = BasicTensor4<T>(x.dims());
      const auto& am = cache.argmax[i];
      for (std::size_t j = 0; j < g.size(); ++j) gin[am[j]] += g[j];
    } else if (const auto* rs = std::get_if<ResidualAddSpec>(&layers[i])) {
      accumulate(gout[rs->from], BasicTensor4<T>(g));
      gin = std::move(g);
    } else {  // Flatten
      gin = std::move(g);
      gin.reshape(x.dims());
    }

    if (need_input_grad) accumulate(gout[i - 1], std::move(gin));
  }
  return grads;
}

template <typename T>
void sgd_step(BasicModel<T>& model, const Gradients<T>& grads, T lr) {
  if (grads.weights.size() != model.num_trainable()) {
    throw InvalidInput("sgd_step: gradient count does not match model");
  }
  for (std::size_t t = 0; t < model.num_trainable(); ++t) {
    auto& w = model.weights()[t];
    const auto& g = grads.weights[t];
    const auto& m = model.masks()[t];
    if (!(g.dims() == w.dims())) {
      throw InvalidInput("sgd_step: gradient dims " + g.dims().str() +
                         " do not match weights " + w.dims().str());
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw TrainingDiverged("non-finite gradient in trainable layer " +
                                   std::to_string(t),
                               0, 0);
      }
      if (m.kept(i)) {
        w[i] -= lr * g[i];
      } else {
        w[i] = T{0};
      }
    }
  }
}

template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor4<T>& logits,
                                    std::span<const int> labels) {
  const Dims4& d = logits.dims();
  const std::size_t n = d.n;
  const std::size_t k = d.per_sample();
  if (labels.size() != n || n == 0) {
    throw InvalidInput("softmax_cross_entropy: " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(n) + " samples");
  }
  LossResult<T> r;
  r.grad = BasicTensor4<T>(d);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const T* z = logits.data() + s * k;
    const int label = labels[s];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw InvalidInput("label " + std::to_string(label) + " out of range");
    }
    double zmax = z[0];
    for (std::size_t c = 1; c < k; ++c) zmax = std::max(zmax, double(z[c]));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(double(z[c]) - zmax);
    const double lse = zmax + std::log(sum);
    total += lse - double(z[label]);
    T* gz = r.grad.data() + s * k;
    for (std::size_t c = 0; c < k; ++c) {
      const double p = std::exp(double(z[c]) - lse);
      gz[c] = static_cast<T>((p - (c == static_cast<std::size_t>(label) ? 1.0 : 0.0)) *
                             inv_n);
    }
    if (argmax_class(logits, s) == static_cast<std::size_t>(label)) ++r.correct;
  }
  r.loss = total * inv_n;
  return r;
}

template <typename T>
std::size_t argmax_class(const BasicTensor4<T>& logits, std::size_t sample) {
  const std::size_t k = logits.dims().per_sample();
  const T* z = logits.data() + sample * k;
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (z[c] > z[best]) best = c;
  }
  return best;
}

#define XBARPRUNE_INSTANTIATE(T)                                              \
  template void xavier_init(BasicModel<T>&, std::uint64_t);                   \
  template ForwardResult<T> forward(const BasicModel<T>&,                     \
                                    const BasicTensor4<T>&);                  \
  template Gradients<T> backward(const BasicModel<T>&, const ForwardCache<T>&, \
                                 const BasicTensor4<T>&);                     \
  template void sgd_step(BasicModel<T>&, const Gradients<T>&, T);             \
  template LossResult<T> softmax_cross_entropy(const BasicTensor4<T>&,        \
                                               std::span<const int>);         \
  template std::size_t argmax_class(const BasicTensor4<T>&, std::size_t);

XBARPRUNE_INSTANTIATE(float)
XBARPRUNE_INSTANTIATE(double)

#undef XBARPRUNE_INSTANTIATE

}  // namespace xbarprune::nn
