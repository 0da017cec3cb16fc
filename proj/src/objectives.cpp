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

#include "randcnn/objectives.hpp"

#include <cmath>

#include "blas.hpp"

namespace randcnn {
namespace {

template <typename T>
void scale_inplace(Tensor<T>& t, double s) {
  const T f = static_cast<T>(s);
  for (auto& v : t.values()) v *= f;
}

double checked_reciprocal(double mean_abs_grad, const std::string& layer) {
  require(std::isfinite(mean_abs_grad) && mean_abs_grad > 0.0,
          ErrorCode::kUnnormalizableLayer,
          "probe gradient at layer '" + layer +
              "' vanishes at the input; the layer cannot be normalized");
  const double w = 1.0 / mean_abs_grad;
  require(std::isfinite(w), ErrorCode::kUnnormalizableLayer,
          "weighting factor for layer '" + layer + "' overflows");
  return w;
}

}  // namespace

template <typename T>
void ObjectiveConfig<T>::validate() const {
  require(content.has_value() || style.has_value(), ErrorCode::kInvalidArgument,
          "objective needs a content or a style target");
  for (double f : {alpha, beta, gamma}) {
    require(std::isfinite(f) && f >= 0.0, ErrorCode::kInvalidArgument,
            "alpha, beta and gamma must be finite and non-negative");
  }
  if (content) {
    require(content->omega > 0.0 && std::isfinite(content->omega),
            ErrorCode::kInvalidArgument, "content weight omega must be positive");
  }
  if (style) {
    for (const auto& l : style->layers) {
      require(l.mu > 0.0 && std::isfinite(l.mu), ErrorCode::kInvalidArgument,
              "texture weight mu must be positive for layer '" + l.layer + "'");
    }
  }
}

template <typename T>
LossAndGrad<T> content_loss_and_grad(const Tensor<T>& features,
                                     const ContentTarget<T>& target) {
  require_same_shape(features, target.features, "content loss");
  const double nm = static_cast<double>(features.size());
  LossAndGrad<T> out{0.0, Tensor<T>(features.shape())};
  const T g_scale = static_cast<T>(target.omega / nm);
  double acc = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const T d = features[i] - target.features[i];
    acc += static_cast<double>(d) * d;
    out.grad[i] = g_scale * d;
  }
  out.loss = target.omega / (2.0 * nm) * acc;
  return out;
}

template <typename T>
Tensor<T> gram(const Tensor<T>& features) {
  const std::size_t n = features.rows(), m = features.cols();
  Tensor<T> g({n, n});
  blas::gram(n, m, features.data(), g.data());
  return g;
}

template <typename T>
LossAndGrad<T> texture_layer_loss_and_grad(const Tensor<T>& features,
                                           const Tensor<T>& target_gram,
                                           double mu) {
  const std::size_t n = features.rows(), m = features.cols();
  require(target_gram.shape() == Shape{n, n}, ErrorCode::kShapeMismatch,
          "Gram target " + shape_to_string(target_gram.shape()) +
              " does not match " + std::to_string(n) + " feature maps");
  const double tol = 1e-5 * std::max(1.0, max_abs(target_gram));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      require(std::abs(static_cast<double>(target_gram.at(i, j)) -
                       target_gram.at(j, i)) <= tol,
              ErrorCode::kInvalidArgument, "Gram target is not symmetric");
    }
  }
  Tensor<T> diff = gram(features);
  double acc = 0.0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] -= target_gram[i];
    acc += static_cast<double>(diff[i]) * diff[i];
  }
  const double n2m2 = static_cast<double>(n) * n * static_cast<double>(m) * m;
  LossAndGrad<T> out{mu / (4.0 * n2m2) * acc, Tensor<T>(features.shape())};
  blas::gemm(false, false, n, m, n, static_cast<T>(mu / n2m2), diff.data(),
             features.data(), T(0), out.grad.data());
  return out;
}

template <typename T>
LossAndGrad<T> tv_loss_and_grad(const Tensor<T>& image) {
  require(image.rank() == 3, ErrorCode::kShapeMismatch,
          "TV expects a C x H x W image");
  const std::size_t c = image.extent(0), h = image.extent(1), w = image.extent(2);
  require(h >= 2 && w >= 2, ErrorCode::kInvalidArgument,
          "TV needs at least 2 pixels along each axis");
  LossAndGrad<T> out{0.0, Tensor<T>(image.shape())};
  double acc = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const T v = image.at(k, i, j);
        if (i + 1 < h) {
          const T d = image.at(k, i + 1, j) - v;
          acc += static_cast<double>(d) * d;
          out.grad.at(k, i + 1, j) += 2 * d;
          out.grad.at(k, i, j) -= 2 * d;
        }
        if (j + 1 < w) {
          const T d = image.at(k, i, j + 1) - v;
          acc += static_cast<double>(d) * d;
          out.grad.at(k, i, j + 1) += 2 * d;
          out.grad.at(k, i, j) -= 2 * d;
        }
      }
    }
  }
  out.loss = acc;
  return out;
}

template <typename T>
Tensor<T> content_probe_gradient(const Network<T>& net, const FeatureCache<T>& cache,
                                 const std::string& layer, double omega) {
  const Tensor<T>& f0 = cache.at(layer);
  Tensor<T> g = f0;
  scale_inplace(g, -omega / static_cast<double>(f0.size()));
  LayerGradients<T> grads;
  grads.emplace_back(layer, std::move(g));
  return net.backward_to_input(cache, grads);
}

template <typename T>
Tensor<T> texture_probe_gradient(const Network<T>& net, const FeatureCache<T>& cache,
                                 const std::string& layer, double mu) {
  const Tensor<T>& f0 = cache.at(layer);
  const Tensor<T> zero_target({f0.rows(), f0.rows()});
  auto probe = texture_layer_loss_and_grad(f0, zero_target, mu);
  LayerGradients<T> grads;
  grads.emplace_back(layer, std::move(probe.grad));
  return net.backward_to_input(cache, grads);
}

template <typename T>
double compute_content_weight(const Network<T>& net, const Tensor<T>& x0,
                              const std::string& layer) {
  const auto cache = net.forward(x0, layer);
  return checked_reciprocal(mean_abs(content_probe_gradient(net, cache, layer, 1.0)),
                            layer);
}

template <typename T>
double compute_texture_weight(const Network<T>& net, const Tensor<T>& x0,
                              const std::string& layer) {
  const auto cache = net.forward(x0, layer);
  return checked_reciprocal(mean_abs(texture_probe_gradient(net, cache, layer, 1.0)),
                            layer);
}

template <typename T>
LossAndGrad<T> style_objective(const Tensor<T>& x, const ObjectiveConfig<T>& cfg,
                               const Network<T>& net, ObjectiveTerms* terms) {
  cfg.validate();
  net.check_input(x);
  const bool use_content = cfg.content && cfg.alpha != 0.0;
  const bool use_style = cfg.style && cfg.beta != 0.0 && !cfg.style->layers.empty();
  const NetworkSpec& spec = net.spec();

  std::optional<std::size_t> deepest;
  auto consider = [&](const std::string& layer) {
    const std::size_t idx = spec.index_of(layer);
    deepest = deepest ? std::max(*deepest, idx) : idx;
  };
  if (use_content) consider(cfg.content->layer);
  if (use_style) {
    for (const auto& l : cfg.style->layers) consider(l.layer);
  }

  ObjectiveTerms local;
  LossAndGrad<T> out{0.0, Tensor<T>(x.shape())};
  if (deepest) {
    const auto cache = net.forward(x, spec.layers[*deepest].name);
    LayerGradients<T> grads;
    if (use_content) {
      auto c = content_loss_and_grad(cache.at(cfg.content->layer), *cfg.content);
      local.content = c.loss;
      out.loss += cfg.alpha * c.loss;
      scale_inplace(c.grad, cfg.alpha);
      grads.emplace_back(cfg.content->layer, std::move(c.grad));
    }
    if (use_style) {
      for (const auto& l : cfg.style->layers) {
        auto e = texture_layer_loss_and_grad(cache.at(l.layer), l.gram, l.mu);
        local.texture += e.loss;
        out.loss += cfg.beta * e.loss;
        scale_inplace(e.grad, cfg.beta);
        grads.emplace_back(l.layer, std::move(e.grad));
      }
    }
    out.grad = net.backward_to_input(cache, grads);
  }
  if (cfg.gamma != 0.0) {
    auto r = tv_loss_and_grad(x);
    local.tv = r.loss;
    out.loss += cfg.gamma * r.loss;
    axpy(cfg.gamma, r.grad, out.grad);
  }
  if (terms) *terms = local;
  return out;
}

template <typename T>
LossAndGrad<T> style_objective(const Tensor<T>& x, const ObjectiveConfig<T>& cfg,
                               const Network<T>& net) {
  return style_objective(x, cfg, net, nullptr);
}

#define RANDCNN_INSTANTIATE_OBJECTIVES(T)                                        \
  template struct ObjectiveConfig<T>;                                            \
  template LossAndGrad<T> content_loss_and_grad(const Tensor<T>&,                \
                                                const ContentTarget<T>&);        \
  template Tensor<T> gram(const Tensor<T>&);                                     \
  template LossAndGrad<T> texture_layer_loss_and_grad(const Tensor<T>&,          \
                                                      const Tensor<T>&, double); \
  template LossAndGrad<T> tv_loss_and_grad(const Tensor<T>&);                    \
  template Tensor<T> content_probe_gradient(const Network<T>&,                   \
                                            const FeatureCache<T>&,              \
                                            const std::string&, double);         \
  template Tensor<T> texture_probe_gradient(const Network<T>&,                   \
                                            const FeatureCache<T>&,              \
                                            const std::string&, double);         \
  template double compute_content_weight(const Network<T>&, const Tensor<T>&,    \
                                         const std::string&);                    \
  template double compute_texture_weight(const Network<T>&, const Tensor<T>&,    \
                                         const std::string&);                    \
  template LossAndGrad<T> style_objective(const Tensor<T>&,                      \
                                          const ObjectiveConfig<T>&,             \
                                          const Network<T>&);                    \
  template LossAndGrad<T> style_objective(                                       \
      const Tensor<T>&, const ObjectiveConfig<T>&, const Network<T>&,            \
      ObjectiveTerms*);

RANDCNN_INSTANTIATE_OBJECTIVES(float)
RANDCNN_INSTANTIATE_OBJECTIVES(double)

}  // namespace randcnn
