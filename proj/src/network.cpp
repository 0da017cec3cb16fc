// Copyright 2026 The randcnn Authors. All Rights Reserved.
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

#include "randcnn/network.hpp"

#include <algorithm>
#include <cstring>

#include "blas.hpp"

namespace randcnn {
namespace {

// Unfolds a C x H x W input into a (C*9) x (H*W) patch matrix for a 3x3,
// stride 1, pad 1 convolution.
template <typename T>
void im2col3x3(const T* in, std::size_t channels, std::size_t h, std::size_t w,
               T* col) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* plane = in + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = col + ((c * 3 + ky) * 3 + kx) * hw;
        const long dx = kx - 1;
        const std::size_t j0 = dx < 0 ? 1 : 0;
        const std::size_t j1 = dx > 0 ? w - 1 : w;
        for (std::size_t i = 0; i < h; ++i) {
          T* row = dst + i * w;
          const long si = static_cast<long>(i) + ky - 1;
          if (si < 0 || si >= static_cast<long>(h) || j0 >= j1) {
            std::fill(row, row + w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(si) * w;
          if (j0 > 0) row[0] = T(0);
          if (j1 < w) row[w - 1] = T(0);
          std::memcpy(row + j0, src + static_cast<long>(j0) + dx,
                      (j1 - j0) * sizeof(T));
        }
      }
    }
  }
}

// Adjoint of im2col3x3: scatters patch-matrix gradients back onto the image.
template <typename T>
void col2im3x3(const T* col, std::size_t channels, std::size_t h, std::size_t w,
               T* out) {
  const std::size_t hw = h * w;
  std::fill(out, out + channels * hw, T(0));
  for (std::size_t c = 0; c < channels; ++c) {
    T* plane = out + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = col + ((c * 3 + ky) * 3 + kx) * hw;
        const long dx = kx - 1;
        const std::size_t j0 = dx < 0 ? 1 : 0;
        const std::size_t j1 = dx > 0 ? w - 1 : w;
        if (j0 >= j1) continue;
        for (std::size_t i = 0; i < h; ++i) {
          const long si = static_cast<long>(i) + ky - 1;
          if (si < 0 || si >= static_cast<long>(h)) continue;
          T* dst = plane + static_cast<std::size_t>(si) * w + dx;
          const T* row = src + i * w;
          for (std::size_t j = j0; j < j1; ++j) dst[j] += row[j];
        }
      }
    }
  }
}

template <typename T>
Tensor<T> conv3x3_forward(const Tensor<T>& in, const std::vector<T>& filters,
                          const std::vector<T>& biases, std::size_t out_ch) {
  const std::size_t c = in.extent(0), h = in.extent(1), w = in.extent(2);
  const std::size_t hw = h * w;
  std::vector<T> col(c * 9 * hw);
  im2col3x3(in.data(), c, h, w, col.data());
  Tensor<T> out({out_ch, h, w});
  T* o = out.data();
  for (std::size_t k = 0; k < out_ch; ++k) std::fill(o + k * hw, o + (k + 1) * hw, biases[k]);
  blas::gemm(false, false, out_ch, hw, c * 9, T(1), filters.data(), col.data(),
             T(1), o);
  return out;
}

template <typename T>
Tensor<T> conv3x3_backward(const Tensor<T>& grad_out, const std::vector<T>& filters,
                           std::size_t in_ch) {
  const std::size_t out_ch = grad_out.extent(0), h = grad_out.extent(1),
                    w = grad_out.extent(2);
  const std::size_t hw = h * w;
  std::vector<T> col(in_ch * 9 * hw);
  blas::gemm(true, false, in_ch * 9, hw, out_ch, T(1), filters.data(),
             grad_out.data(), T(0), col.data());
  Tensor<T> grad_in({in_ch, h, w});
  col2im3x3(col.data(), in_ch, h, w, grad_in.data());
  return grad_in;
}

template <typename T>
Tensor<T> avgpool_forward(const Tensor<T>& in) {
  const std::size_t c = in.extent(0), h = in.extent(1), w = in.extent(2);
  require(h >= 2 && w >= 2, ErrorCode::kShapeMismatch,
          "activation " + shape_to_string(in.shape()) + " too small to pool");
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> out({c, oh, ow});
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < oh; ++i) {
      const T* r0 = in.data() + (k * h + 2 * i) * w;
      const T* r1 = r0 + w;
      T* dst = out.data() + (k * oh + i) * ow;
      for (std::size_t j = 0; j < ow; ++j) {
        dst[j] = T(0.25) * ((r0[2 * j] + r0[2 * j + 1]) + (r1[2 * j] + r1[2 * j + 1]));
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> avgpool_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
  Tensor<T> grad_in(in_shape);
  const std::size_t c = in_shape[0], h = in_shape[1], w = in_shape[2];
  const std::size_t oh = grad_out.extent(1), ow = grad_out.extent(2);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < oh; ++i) {
      const T* g = grad_out.data() + (k * oh + i) * ow;
      T* r0 = grad_in.data() + (k * h + 2 * i) * w;
      T* r1 = r0 + w;
      for (std::size_t j = 0; j < ow; ++j) {
        const T q = T(0.25) * g[j];
        r0[2 * j] = q;
        r0[2 * j + 1] = q;
        r1[2 * j] = q;
        r1[2 * j + 1] = q;
      }
    }
  }
  return grad_in;
}

template <typename T>
Tensor<T> fc_forward(const Tensor<T>& in, const std::vector<T>& filters,
                     const std::vector<T>& biases, std::size_t out_len) {
  Tensor<T> out({out_len});
  std::copy(biases.begin(), biases.end(), out.data());
  blas::gemm(false, false, out_len, 1, in.size(), T(1), filters.data(), in.data(),
             T(1), out.data());
  return out;
}

template <typename T>
Tensor<T> fc_backward(const Tensor<T>& grad_out, const std::vector<T>& filters,
                      const Shape& in_shape) {
  Tensor<T> grad_in(in_shape);
  blas::gemm(true, false, grad_in.size(), 1, grad_out.size(), T(1),
             filters.data(), grad_out.data(), T(0), grad_in.data());
  return grad_in;
}

template <typename T>
void relu_inplace(Tensor<T>& t) {
  for (auto& v : t.values()) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_mask(const Tensor<T>& out, Tensor<T>& grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(out[i] > T(0))) grad[i] = T(0);
  }
}

}  // namespace

template <typename T>
std::size_t FeatureCache<T>::stage_of(std::string_view layer) const {
  for (const auto& [name, stage] : names_) {
    if (name == layer) return stage;
  }
  fail(ErrorCode::kUnknownLayer,
       "layer '" + std::string(layer) + "' is not in the feature cache");
}

template <typename T>
const Tensor<T>& FeatureCache<T>::at(std::string_view layer) const {
  return outputs_[stage_of(layer)];
}

template <typename T>
bool FeatureCache<T>::contains(std::string_view layer) const {
  return std::any_of(names_.begin(), names_.end(),
                     [&](const auto& p) { return p.first == layer; });
}

template <typename T>
Network<T>::Network(NetworkSpec spec, const WeightSet& weights)
    : spec_(std::move(spec)) {
  spec_.validate();
  validate_weights(spec_, weights);
  const auto& layers = spec_.layers;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Stage stage;
    stage.layer = i;
    stage.names.push_back(layers[i].name);
    if (layers[i].has_weights()) {
      const LayerWeights* lw = weights.find(layers[i].name);
      Params p;
      p.filters.assign(lw->filters.values().begin(), lw->filters.values().end());
      p.biases.assign(lw->biases.values().begin(), lw->biases.values().end());
      stage.param = params_.size();
      params_.push_back(std::move(p));
      if (i + 1 < layers.size() && layers[i + 1].kind == LayerKind::kRelu) {
        stage.fused_relu = true;
        stage.names.push_back(layers[i + 1].name);
        ++i;
      }
    }
    stages_.push_back(std::move(stage));
  }
}

template <typename T>
std::size_t Network<T>::stage_of(std::string_view layer) const {
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (const auto& n : stages_[s].names) {
      if (n == layer) return s;
    }
  }
  fail(ErrorCode::kUnknownLayer,
       "layer '" + std::string(layer) + "' is not part of this network");
}

template <typename T>
void Network<T>::check_input(const Tensor<T>& input) const {
  require(input.rank() == 3, ErrorCode::kShapeMismatch,
          "network input must be C x H x W, got " + shape_to_string(input.shape()));
  require(input.extent(0) == spec_.layers.front().in_channels,
          ErrorCode::kShapeMismatch,
          "network expects " + std::to_string(spec_.layers.front().in_channels) +
              " input channels, got " + std::to_string(input.extent(0)));
  if (spec_.input_size) {
    require(input.extent(1) == spec_.input_size->height &&
                input.extent(2) == spec_.input_size->width,
            ErrorCode::kShapeMismatch,
            "this network requires " + std::to_string(spec_.input_size->height) +
                "x" + std::to_string(spec_.input_size->width) +
                " input, got " + shape_to_string(input.shape()));
  }
}

template <typename T>
Tensor<T> Network<T>::run_stage(const Stage& stage, const Tensor<T>& in) const {
  const LayerSpec& layer = spec_.layers[stage.layer];
  Tensor<T> out;
  switch (layer.kind) {
    case LayerKind::kConv3x3: {
      require(in.rank() == 3 && in.extent(0) == layer.in_channels,
              ErrorCode::kShapeMismatch, "bad input to '" + layer.name + "'");
      const Params& p = params_[stage.param];
      out = conv3x3_forward(in, p.filters, p.biases, layer.out_channels);
      break;
    }
    case LayerKind::kFc: {
      require(in.size() == layer.in_channels, ErrorCode::kShapeMismatch,
              "bad input to '" + layer.name + "'");
      const Params& p = params_[stage.param];
      out = fc_forward(in, p.filters, p.biases, layer.out_channels);
      break;
    }
    case LayerKind::kAvgPool2x2:
      out = avgpool_forward(in);
      break;
    case LayerKind::kRelu:
      out = in;
      relu_inplace(out);
      break;
  }
  if (stage.fused_relu) relu_inplace(out);
  return out;
}

template <typename T>
FeatureCache<T> Network<T>::forward(const Tensor<T>& input,
                                    std::string_view upto) const {
  check_input(input);
  const std::size_t last = stage_of(upto);
  FeatureCache<T> cache;
  cache.input_ = input;
  cache.outputs_.reserve(last + 1);
  for (std::size_t s = 0; s <= last; ++s) {
    const Tensor<T>& in = s == 0 ? cache.input_ : cache.outputs_[s - 1];
    cache.outputs_.push_back(run_stage(stages_[s], in));
    for (const auto& n : stages_[s].names) cache.names_.emplace_back(n, s);
  }
  return cache;
}

template <typename T>
Tensor<T> Network<T>::back_stage(const Stage& stage, const Tensor<T>& in,
                                 const Tensor<T>& out, Tensor<T> grad) const {
  const LayerSpec& layer = spec_.layers[stage.layer];
  if (stage.fused_relu || layer.kind == LayerKind::kRelu) relu_mask(out, grad);
  switch (layer.kind) {
    case LayerKind::kConv3x3: {
      Tensor<T> g = conv3x3_backward(grad, params_[stage.param].filters,
                                     layer.in_channels);
      if (sign_fault_ && stage.layer == 0) {
        for (auto& v : g.values()) v = -v;
      }
      return g;
    }
    case LayerKind::kFc:
      return fc_backward(grad, params_[stage.param].filters, in.shape());
    case LayerKind::kAvgPool2x2:
      return avgpool_backward(grad, in.shape());
    case LayerKind::kRelu:
      return grad;
  }
  return grad;
}

template <typename T>
Tensor<T> Network<T>::backward_to_input(const FeatureCache<T>& cache,
                                        const LayerGradients<T>& grads) const {
  std::vector<Tensor<T>> pending(cache.depth());
  std::size_t deepest = 0;
  bool any = false;
  for (const auto& [name, g] : grads) {
    const std::size_t s = cache.stage_of(name);
    require(g.shape() == cache.outputs_[s].shape(), ErrorCode::kShapeMismatch,
            "gradient for '" + name + "' has shape " + shape_to_string(g.shape()) +
                ", activation is " + shape_to_string(cache.outputs_[s].shape()));
    if (pending[s].empty()) {
      pending[s] = g;
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) pending[s][i] += g[i];
    }
    deepest = any ? std::max(deepest, s) : s;
    any = true;
  }
  if (!any) return Tensor<T>(cache.input_.shape());

  for (std::size_t s = deepest + 1; s-- > 0;) {
    if (pending[s].empty()) continue;  // nothing flows through yet
    const Tensor<T>& in = s == 0 ? cache.input_ : cache.outputs_[s - 1];
    Tensor<T> g = back_stage(stages_[s], in, cache.outputs_[s], std::move(pending[s]));
    if (s == 0) return g;
    if (pending[s - 1].empty()) {
      pending[s - 1] = std::move(g);
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) pending[s - 1][i] += g[i];
    }
  }
  return Tensor<T>(cache.input_.shape());
}

template class FeatureCache<float>;
template class FeatureCache<double>;
template class Network<float>;
template class Network<double>;

}  // namespace randcnn
