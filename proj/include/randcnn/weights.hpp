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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "randcnn/network_spec.hpp"
#include "randcnn/rng.hpp"
#include "randcnn/tensor.hpp"

namespace randcnn {

enum class WeightScheme : std::uint8_t {
  kPureRandom = 0,
  kStacked = 1,
  kImported = 2,
};

const char* weight_scheme_name(WeightScheme scheme) noexcept;

struct Provenance {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  WeightScheme scheme = WeightScheme::kPureRandom;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct LayerWeights {
  std::string name;
  Tensor<float> filters;  // Cout x Cin x 3 x 3 (conv) or Cout x Cin (fc)
  Tensor<float> biases;   // Cout
  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct WeightSet {
  std::vector<LayerWeights> layers;  // forward order
  Provenance provenance;

  const LayerWeights* find(std::string_view name) const;
  // Replaces the entry with the same name, or appends.
  void set(LayerWeights layer);

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

Shape filter_shape(const LayerSpec& layer);

// Fills filters with N(0, sigma) draws from `rng` in row-major order; zero
// biases.
LayerWeights init_layer_weights(const LayerSpec& layer, double sigma, Rng& rng);

// One xoshiro stream for the whole net, consumed in layer order.
WeightSet init_random_weights(const NetworkSpec& spec, double sigma,
                              std::uint64_t seed);

// Every weighted layer of `spec` must be present with matching shapes and
// finite values. Extra layers in `weights` are ignored.
void validate_weights(const NetworkSpec& spec, const WeightSet& weights);

inline constexpr std::uint32_t kWeightFileVersion = 1;

// Binary layout, all little-endian:
//   "RWNW" | version u32 | layer count u32 |
//   per layer: name length u16, name bytes, tensor count u8,
//              per tensor: rank u8, extents u64[rank], f32 data |
//   seed u64 | sigma f64 | scheme u8
void save_weights(const WeightSet& weights, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_weights(const WeightSet& weights);

WeightSet load_weights(const std::filesystem::path& path);
WeightSet decode_weights(const std::vector<std::uint8_t>& bytes);

}  // namespace randcnn
