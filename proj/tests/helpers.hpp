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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "randcnn/network.hpp"
#include "randcnn/network_spec.hpp"
#include "randcnn/rng.hpp"
#include "randcnn/tensor.hpp"
#include "randcnn/weights.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return RANDCNN_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("randcnn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// conv(3->4) relu pool conv(4->5) relu, named like VGG.
inline randcnn::NetworkSpec two_conv_spec() {
  using namespace randcnn;
  NetworkSpec spec;
  spec.layers = {conv_layer("conv1_1", 3, 4), relu_layer("relu1_1", 4),
                 pool_layer("pool1", 4), conv_layer("conv2_1", 4, 5),
                 relu_layer("relu2_1", 5)};
  return spec;
}

inline randcnn::Tensor<float> sine_tensor(randcnn::Shape shape, double amp, double a,
                                          double b) {
  randcnn::Tensor<float> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(amp * std::sin(a * static_cast<double>(i) + b));
  }
  return t;
}

// Weights of the torch reference network.
inline randcnn::WeightSet two_conv_weights() {
  randcnn::WeightSet ws;
  ws.layers.push_back({"conv1_1", sine_tensor({4, 3, 3, 3}, 0.3, 0.37, 0.1),
                       randcnn::Tensor<float>({4})});
  ws.layers.push_back({"conv2_1", sine_tensor({5, 4, 3, 3}, 0.3, 0.23, 0.7),
                       randcnn::Tensor<float>({5})});
  return ws;
}

// Single conv layer with one input and one output channel whose only
// nonzero tap is the centre.
inline randcnn::NetworkSpec center_tap_spec() {
  using namespace randcnn;
  NetworkSpec spec;
  spec.layers = {conv_layer("conv1_1", 1, 1), relu_layer("relu1_1", 1)};
  return spec;
}

inline randcnn::WeightSet center_tap_weights(float w) {
  randcnn::Tensor<float> f({1, 1, 3, 3});
  f[4] = w;
  randcnn::WeightSet ws;
  ws.layers.push_back({"conv1_1", f, randcnn::Tensor<float>({1})});
  return ws;
}

template <typename T>
randcnn::Tensor<T> random_tensor(randcnn::Shape shape, std::uint64_t seed, double lo,
                                 double hi) {
  randcnn::Rng rng(seed);
  randcnn::Tensor<T> t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Central differences over every coordinate, written independently of the
// library's finite-difference helper.
inline randcnn::Tensor<double> numeric_grad(
    const std::function<double(const randcnn::Tensor<double>&)>& f,
    const randcnn::Tensor<double>& x, double h) {
  randcnn::Tensor<double> g(x.shape());
  randcnn::Tensor<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const randcnn::Tensor<double>& a, const randcnn::Tensor<double>& b) {
  const double diff = std::sqrt(randcnn::squared_norm(randcnn::sub(a, b)));
  const double scale =
      std::max(std::sqrt(randcnn::squared_norm(a)), std::sqrt(randcnn::squared_norm(b)));
  return scale == 0.0 ? 0.0 : diff / scale;
}

}  // namespace testing
