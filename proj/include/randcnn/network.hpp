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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "randcnn/network_spec.hpp"
#include "randcnn/tensor.hpp"
#include "randcnn/weights.hpp"

namespace randcnn {

template <typename T>
class Network;

// Gradients injected at named layers. Repeated names accumulate.
template <typename T>
using LayerGradients = std::vector<std::pair<std::string, Tensor<T>>>;

// Forward activations for one input, from the first layer through the
// requested one. A conv (or fc) layer followed by a ReLU is stored once:
// both names resolve to the rectified output.
template <typename T>
class FeatureCache {
 public:
  const Tensor<T>& input() const noexcept { return input_; }
  const Tensor<T>& at(std::string_view layer) const;
  bool contains(std::string_view layer) const;
  std::size_t depth() const noexcept { return outputs_.size(); }

 private:
  friend class Network<T>;
  std::size_t stage_of(std::string_view layer) const;

  Tensor<T> input_;
  std::vector<Tensor<T>> outputs_;
  std::vector<std::pair<std::string, std::size_t>> names_;
};

// Executable net over a fixed weight set, with weights held in precision T.
// forward/backward_to_input are const and reentrant.
template <typename T>
class Network {
 public:
  Network(NetworkSpec spec, const WeightSet& weights);

  const NetworkSpec& spec() const noexcept { return spec_; }

  // Shape of `layer`'s representation for an input of the given size.
  Shape output_shape(std::string_view layer, std::size_t height,
                     std::size_t width) const {
    return spec_.output_shape(layer, height, width);
  }

  void check_input(const Tensor<T>& input) const;

  FeatureCache<T> forward(const Tensor<T>& input, std::string_view upto) const;

  // Reverse-mode pass from the injected layer gradients down to the input.
  // ReLU masks come from the cached forward outputs.
  Tensor<T> backward_to_input(const FeatureCache<T>& cache,
                              const LayerGradients<T>& grads) const;

  // Mutation fixture for the gradient checker: negates the input gradient
  // of a leading conv layer, so a correct checker must fail.
  void set_backward_sign_fault(bool enabled) noexcept { sign_fault_ = enabled; }

 private:
  struct Stage {
    std::size_t layer = 0;  // index into spec_.layers of the primary op
    bool fused_relu = false;
    std::vector<std::string> names;
    std::size_t param = 0;  // index into params_ for conv/fc
  };
  struct Params {
    std::vector<T> filters;
    std::vector<T> biases;
  };

  std::size_t stage_of(std::string_view layer) const;
  Tensor<T> run_stage(const Stage& stage, const Tensor<T>& in) const;
  Tensor<T> back_stage(const Stage& stage, const Tensor<T>& in,
                       const Tensor<T>& out, Tensor<T> grad_out) const;

  NetworkSpec spec_;
  std::vector<Stage> stages_;
  std::vector<Params> params_;
  bool sign_fault_ = false;
};

extern template class FeatureCache<float>;
extern template class FeatureCache<double>;
extern template class Network<float>;
extern template class Network<double>;

}  // namespace randcnn
