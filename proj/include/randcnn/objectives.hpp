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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "randcnn/network.hpp"
#include "randcnn/tensor.hpp"

namespace randcnn {

template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  Tensor<T> grad;
};

template <typename T>
struct ContentTarget {
  std::string layer;
  Tensor<T> features;  // F0, the layer activation of the target image
  double omega = 1.0;
};

template <typename T>
struct StyleLayer {
  std::string layer;
  Tensor<T> gram;  // G0, N x N
  double mu = 1.0;
};

template <typename T>
struct StyleTarget {
  std::vector<StyleLayer<T>> layers;
};

template <typename T>
struct ObjectiveConfig {
  std::optional<ContentTarget<T>> content;
  std::optional<StyleTarget<T>> style;
  double alpha = 100.0;
  double beta = 1.0;
  double gamma = 1000.0;

  void validate() const;
};

// omega / (2NM) * |F - F0|^2 and its derivative omega / (NM) * (F - F0).
// F is viewed as N x M: leading extent by everything else.
template <typename T>
LossAndGrad<T> content_loss_and_grad(const Tensor<T>& features,
                                     const ContentTarget<T>& target);

// F * F^T for the N x M view of `features`.
template <typename T>
Tensor<T> gram(const Tensor<T>& features);

// mu / (4 N^2 M^2) * |G(F) - G0|_F^2; gradient mu / (N^2 M^2) * (G - G0) F.
template <typename T>
LossAndGrad<T> texture_layer_loss_and_grad(const Tensor<T>& features,
                                           const Tensor<T>& target_gram,
                                           double mu);

// Sum of squared differences between vertically and horizontally adjacent
// pixels, over all channels.
template <typename T>
LossAndGrad<T> tv_loss_and_grad(const Tensor<T>& image);

// Gradient-impact normalizers. Both probe the layer with omega (mu) = 1,
// backpropagate through the forward cache of x0, and return the reciprocal
// of the mean absolute input gradient.
//
// Content probe: dL/dF at F = 0, i.e. -F(x0) / (NM).
// Texture probe: G(x0) F(x0) / (N^2 M^2), the texture gradient at F = F(x0)
// against a zero Gram target.
template <typename T>
double compute_content_weight(const Network<T>& net, const Tensor<T>& x0,
                              const std::string& layer);
template <typename T>
double compute_texture_weight(const Network<T>& net, const Tensor<T>& x0,
                              const std::string& layer);

// The probe gradients themselves, exposed so the normalization can be
// re-checked with a weight applied.
template <typename T>
Tensor<T> content_probe_gradient(const Network<T>& net, const FeatureCache<T>& cache,
                                 const std::string& layer, double omega);
template <typename T>
Tensor<T> texture_probe_gradient(const Network<T>& net, const FeatureCache<T>& cache,
                                 const std::string& layer, double mu);

// alpha * L_content + beta * sum_l mu_l E_l + gamma * TV. Layer gradients
// of all active terms go through one backward pass; terms with a zero
// coefficient or no target cost no forward work.
template <typename T>
LossAndGrad<T> style_objective(const Tensor<T>& x, const ObjectiveConfig<T>& cfg,
                               const Network<T>& net);

// Per-term breakdown of the last style_objective evaluation.
struct ObjectiveTerms {
  double content = 0.0;
  double texture = 0.0;
  double tv = 0.0;
};

template <typename T>
LossAndGrad<T> style_objective(const Tensor<T>& x, const ObjectiveConfig<T>& cfg,
                               const Network<T>& net, ObjectiveTerms* terms);

}  // namespace randcnn
