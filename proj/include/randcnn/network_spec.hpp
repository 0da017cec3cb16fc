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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "randcnn/tensor.hpp"

namespace randcnn {

enum class LayerKind : std::uint8_t { kConv3x3, kRelu, kAvgPool2x2, kFc };

const char* layer_kind_name(LayerKind kind) noexcept;

// Convolutions are always 3x3, stride 1, zero padding 1. Pooling is always
// 2x2 average with stride 2. For fc layers in_channels is the flattened
// length of the incoming activation.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;

  bool has_weights() const noexcept {
    return kind == LayerKind::kConv3x3 || kind == LayerKind::kFc;
  }
};

struct InputSize {
  std::size_t height = 0;
  std::size_t width = 0;
  friend bool operator==(const InputSize&, const InputSize&) = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  // Fixed input size; required (and forced to 256x256 for VGG) once fc
  // layers are present. Empty means any size.
  std::optional<InputSize> input_size;

  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  const LayerSpec& layer(std::string_view name) const {
    return layers[index_of(name)];
  }
  bool has_fc() const;
  std::size_t count(LayerKind kind) const;

  // Keeps layers up to `name`. A conv or fc layer keeps its trailing ReLU so
  // the rectified representation stays available.
  NetworkSpec truncated(std::string_view name) const;

  // Output shape of `name` for a C x height x width input.
  Shape output_shape(std::string_view name, std::size_t height,
                     std::size_t width) const;

  // Throws on broken channel chaining, duplicate names, fc before a pool
  // boundary without a fixed input size.
  void validate() const;
};

// Canonical VGG-19 with average pooling: 16 conv, 5 pool, and optionally
// fc6/fc7/fc8 (which pins the input to 256x256).
NetworkSpec build_vgg19_spec(std::optional<std::string> truncate_at = std::nullopt,
                             bool include_fc = false);

// Conv layer names of VGG-19 in forward order.
const std::vector<std::string>& vgg19_conv_names();

// Builders for hand-assembled nets (tests, gradient checks).
LayerSpec conv_layer(std::string name, std::size_t in, std::size_t out);
LayerSpec relu_layer(std::string name, std::size_t channels);
LayerSpec pool_layer(std::string name, std::size_t channels);
LayerSpec fc_layer(std::string name, std::size_t in, std::size_t out);

}  // namespace randcnn
