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

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>

#include "randcnn/tensor.hpp"

namespace randcnn {

inline constexpr std::array<double, 3> kDefaultMeanRgb = {123.68, 116.779,
                                                          103.939};

struct ImageSize {
  std::size_t width = 0;
  std::size_t height = 0;
};

struct ImageMeta {
  std::size_t width = 0;
  std::size_t height = 0;
  std::array<double, 3> mean_rgb = kDefaultMeanRgb;

  // Throws kInvalidArgument unless width, height >= 8 and means in [0, 255].
  void validate() const;

  template <typename T>
  static ImageMeta for_image(const Tensor<T>& image,
                             std::array<double, 3> mean = kDefaultMeanRgb) {
    require(image.rank() == 3, ErrorCode::kShapeMismatch,
            "image tensor must be 3 x H x W");
    return ImageMeta{image.extent(2), image.extent(1), mean};
  }
};

// Reads binary PPM (P6, maxval <= 255) or 8-bit PNG into a 3 x H x W tensor
// in the 0-255 scale. With `resize`, the image is bilinearly resampled.
Tensor<float> load_image(const std::filesystem::path& path,
                         std::optional<ImageSize> resize = std::nullopt);

// Clamps to [0, 255], rounds half away from zero, writes 8-bit RGB PNG.
void save_image(const Tensor<float>& image, const std::filesystem::path& path);

// Half-pixel-centre bilinear resampling of a C x H x W tensor.
Tensor<float> resize_bilinear(const Tensor<float>& image, ImageSize size);

template <typename T>
void check_rgb(const Tensor<T>& img, const ImageMeta& meta) {
  require(img.rank() == 3 && img.extent(0) == 3, ErrorCode::kShapeMismatch,
          "expected a 3 x H x W image, got " + shape_to_string(img.shape()));
  require(img.extent(1) == meta.height && img.extent(2) == meta.width,
          ErrorCode::kShapeMismatch,
          "image is " + shape_to_string(img.shape()) + " but meta says " +
              std::to_string(meta.height) + "x" + std::to_string(meta.width));
  meta.validate();
}

template <typename T>
Tensor<T> preprocess(const Tensor<T>& img, const ImageMeta& meta) {
  check_rgb(img, meta);
  Tensor<T> out = img;
  const std::size_t plane = meta.width * meta.height;
  for (std::size_t c = 0; c < 3; ++c) {
    const T m = static_cast<T>(meta.mean_rgb[c]);
    for (std::size_t k = 0; k < plane; ++k) out[c * plane + k] -= m;
  }
  return out;
}

template <typename T>
Tensor<T> deprocess(const Tensor<T>& img, const ImageMeta& meta) {
  check_rgb(img, meta);
  Tensor<T> out = img;
  const std::size_t plane = meta.width * meta.height;
  for (std::size_t c = 0; c < 3; ++c) {
    const T m = static_cast<T>(meta.mean_rgb[c]);
    for (std::size_t k = 0; k < plane; ++k) out[c * plane + k] += m;
  }
  return out;
}

// Peak signal-to-noise ratio in dB between two 0-255 images after clamping.
double psnr(const Tensor<float>& a, const Tensor<float>& b);

}  // namespace randcnn
