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

#include "randcnn/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace randcnn {
namespace {

class Writer {
 public:
  template <typename U>
  void put(U value) {
    static_assert(std::is_unsigned_v<U>);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
    }
  }
  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return value;
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    require(pos_ + n <= bytes_.size(), ErrorCode::kTruncatedFile,
            "weight file is truncated");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const Tensor<float>& t) {
  w.put(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t e : t.shape()) w.put(static_cast<std::uint64_t>(e));
  for (float v : t.values()) w.put_f32(v);
}

Tensor<float> read_tensor(Reader& r) {
  const auto rank = r.get<std::uint8_t>();
  require(rank >= 1 && rank <= 4, ErrorCode::kNotAWeightFile,
          "weight tensor has invalid rank " + std::to_string(rank));
  Shape shape(rank);
  std::uint64_t volume = 1;
  for (auto& e : shape) {
    const auto extent = r.get<std::uint64_t>();
    require(extent >= 1 && extent < (1ULL << 32), ErrorCode::kNotAWeightFile,
            "weight tensor has invalid extent");
    e = static_cast<std::size_t>(extent);
    volume *= extent;
  }
  require(volume * 4 <= r.remaining(), ErrorCode::kTruncatedFile,
          "weight file is truncated");
  std::vector<float> data(static_cast<std::size_t>(volume));
  for (auto& v : data) v = r.get_f32();
  return Tensor<float>(std::move(shape), std::move(data));
}

}  // namespace

const char* weight_scheme_name(WeightScheme scheme) noexcept {
  switch (scheme) {
    case WeightScheme::kPureRandom: return "pure-random";
    case WeightScheme::kStacked: return "stacked";
    case WeightScheme::kImported: return "imported";
  }
  return "?";
}

const LayerWeights* WeightSet::find(std::string_view name) const {
  for (const auto& l : layers) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

void WeightSet::set(LayerWeights layer) {
  for (auto& l : layers) {
    if (l.name == layer.name) {
      l = std::move(layer);
      return;
    }
  }
  layers.push_back(std::move(layer));
}

Shape filter_shape(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::kConv3x3: return {layer.out_channels, layer.in_channels, 3, 3};
    case LayerKind::kFc: return {layer.out_channels, layer.in_channels};
    default:
      fail(ErrorCode::kInvalidArgument, "layer '" + layer.name + "' has no weights");
  }
}

LayerWeights init_layer_weights(const LayerSpec& layer, double sigma, Rng& rng) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "sigma must be positive");
  LayerWeights out{layer.name, Tensor<float>(filter_shape(layer)),
                   Tensor<float>({layer.out_channels})};
  for (auto& v : out.filters.values()) {
    v = static_cast<float>(rng.gaussian(0.0, sigma));
  }
  return out;
}

WeightSet init_random_weights(const NetworkSpec& spec, double sigma,
                              std::uint64_t seed) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "sigma must be positive");
  spec.validate();
  WeightSet ws;
  ws.provenance = {seed, sigma, WeightScheme::kPureRandom};
  Rng rng(seed);
  for (const auto& layer : spec.layers) {
    if (layer.has_weights()) ws.layers.push_back(init_layer_weights(layer, sigma, rng));
  }
  return ws;
}

void validate_weights(const NetworkSpec& spec, const WeightSet& weights) {
  for (const auto& layer : spec.layers) {
    if (!layer.has_weights()) continue;
    const LayerWeights* lw = weights.find(layer.name);
    require(lw != nullptr, ErrorCode::kShapeMismatch,
            "weights missing for layer '" + layer.name + "'");
    require(lw->filters.shape() == filter_shape(layer), ErrorCode::kShapeMismatch,
            "filter shape " + shape_to_string(lw->filters.shape()) +
                " does not match layer '" + layer.name + "' " +
                shape_to_string(filter_shape(layer)));
    require(lw->biases.shape() == Shape{layer.out_channels},
            ErrorCode::kShapeMismatch,
            "bias length does not match layer '" + layer.name + "'");
    require(lw->filters.all_finite() && lw->biases.all_finite(),
            ErrorCode::kNonFinite,
            "non-finite weight in layer '" + layer.name + "'");
  }
}

std::vector<std::uint8_t> encode_weights(const WeightSet& weights) {
  Writer w;
  w.put_bytes("RWNW");
  w.put(kWeightFileVersion);
  w.put(static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& l : weights.layers) {
    require(l.name.size() < 65536, ErrorCode::kInvalidArgument, "layer name too long");
    w.put(static_cast<std::uint16_t>(l.name.size()));
    w.put_bytes(l.name);
    w.put(std::uint8_t{2});
    write_tensor(w, l.filters);
    write_tensor(w, l.biases);
  }
  w.put(weights.provenance.seed);
  w.put_f64(weights.provenance.sigma);
  w.put(static_cast<std::uint8_t>(weights.provenance.scheme));
  return w.take();
}

WeightSet decode_weights(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 4 && std::memcmp(bytes.data(), "RWNW", 4) == 0,
          ErrorCode::kNotAWeightFile, "not a weight file (bad magic)");
  Reader r(bytes);
  r.get_string(4);
  const auto version = r.get<std::uint32_t>();
  require(version == kWeightFileVersion, ErrorCode::kVersionMismatch,
          "unsupported weight file version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>();
  WeightSet ws;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerWeights lw;
    lw.name = r.get_string(r.get<std::uint16_t>());
    const auto tensors = r.get<std::uint8_t>();
    require(tensors == 2, ErrorCode::kNotAWeightFile,
            "layer '" + lw.name + "' must carry filters and biases");
    lw.filters = read_tensor(r);
    lw.biases = read_tensor(r);
    require(lw.biases.rank() == 1 && lw.biases.extent(0) == lw.filters.extent(0),
            ErrorCode::kShapeMismatch,
            "bias length does not match filters in layer '" + lw.name + "'");
    ws.layers.push_back(std::move(lw));
  }
  ws.provenance.seed = r.get<std::uint64_t>();
  ws.provenance.sigma = r.get_f64();
  const auto scheme = r.get<std::uint8_t>();
  require(scheme <= 2, ErrorCode::kNotAWeightFile, "unknown weight scheme tag");
  ws.provenance.scheme = static_cast<WeightScheme>(scheme);
  require(r.remaining() == 0, ErrorCode::kNotAWeightFile,
          "trailing bytes after weight file footer");
  return ws;
}

void save_weights(const WeightSet& weights, const std::filesystem::path& path) {
  const auto bytes = encode_weights(weights);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot open weight file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kIo,
          "failed writing weight file: " + path.string());
}

WeightSet load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open weight file: " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return decode_weights(bytes);
}

}  // namespace randcnn
