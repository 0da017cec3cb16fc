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

#include "randcnn/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace randcnn {
namespace {

struct Rgb8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo,
          "cannot open image file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  return token;
}

std::size_t ppm_number(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                       const std::filesystem::path& path) {
  const std::string tok = ppm_token(bytes, pos);
  require(!tok.empty() &&
              tok.find_first_not_of("0123456789") == std::string::npos &&
              tok.size() < 10,
          ErrorCode::kUnsupportedFormat,
          "malformed PPM header in " + path.string());
  return std::stoul(tok);
}

Rgb8 decode_ppm(const std::vector<std::uint8_t>& bytes,
                const std::filesystem::path& path) {
  std::size_t pos = 2;
  Rgb8 img;
  img.width = ppm_number(bytes, pos, path);
  img.height = ppm_number(bytes, pos, path);
  const std::size_t maxval = ppm_number(bytes, pos, path);
  require(maxval >= 1 && maxval <= 255, ErrorCode::kUnsupportedFormat,
          "only 8-bit PPM is supported: " + path.string());
  require(img.width >= 1 && img.height >= 1, ErrorCode::kUnsupportedFormat,
          "PPM has a zero dimension: " + path.string());
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = img.width * img.height * 3;
  require(pos + n <= bytes.size(), ErrorCode::kIo,
          "truncated PPM raster in " + path.string());
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  if (maxval != 255) {
    for (auto& p : img.pixels) {
      p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
    }
  }
  return img;
}

Rgb8 decode_png(const std::vector<std::uint8_t>& bytes,
                const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " +
                             image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Rgb8 img;
  img.width = image.width;
  img.height = image.height;
  img.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::kIo, "cannot decode PNG " + path.string() + ": " + msg);
  }
  return img;
}

}  // namespace

void ImageMeta::validate() const {
  require(width >= 8 && height >= 8, ErrorCode::kInvalidArgument,
          "images must be at least 8x8, got " + std::to_string(width) + "x" +
              std::to_string(height));
  for (double m : mean_rgb) {
    require(m >= 0.0 && m <= 255.0, ErrorCode::kInvalidArgument,
            "mean RGB components must lie in [0, 255]");
  }
}

Tensor<float> load_image(const std::filesystem::path& path,
                         std::optional<ImageSize> resize) {
  if (resize) {
    require(resize->width >= 1 && resize->height >= 1,
            ErrorCode::kInvalidArgument, "resize request has a zero dimension");
  }
  const auto bytes = read_file(path);
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G',
                                                0x0d, 0x0a, 0x1a, 0x0a};
  Rgb8 rgb;
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    rgb = decode_png(bytes, path);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    rgb = decode_ppm(bytes, path);
  } else {
    fail(ErrorCode::kUnsupportedFormat,
         "unsupported image format (expected PNG or binary PPM): " +
             path.string());
  }

  Tensor<float> out({3, rgb.height, rgb.width});
  for (std::size_t i = 0; i < rgb.height; ++i) {
    for (std::size_t j = 0; j < rgb.width; ++j) {
      const std::uint8_t* px = &rgb.pixels[(i * rgb.width + j) * 3];
      for (std::size_t c = 0; c < 3; ++c) out.at(c, i, j) = px[c];
    }
  }
  if (resize && (resize->width != rgb.width || resize->height != rgb.height)) {
    return resize_bilinear(out, *resize);
  }
  return out;
}

void save_image(const Tensor<float>& image, const std::filesystem::path& path) {
  require(image.rank() == 3 && image.extent(0) == 3, ErrorCode::kShapeMismatch,
          "save_image expects a 3 x H x W tensor, got " +
              shape_to_string(image.shape()));
  const std::size_t h = image.extent(1);
  const std::size_t w = image.extent(2);
  std::vector<std::uint8_t> pixels(w * h * 3);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t c = 0; c < 3; ++c) {
        float v = image.at(c, i, j);
        if (!std::isfinite(v)) v = 0.0f;
        const long q = std::lround(std::clamp(v, 0.0f, 255.0f));
        pixels[(i * w + j) * 3 + c] = static_cast<std::uint8_t>(q);
      }
    }
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(w);
  png.height = static_cast<png_uint_32>(h);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, pixels.data(), 0,
                               nullptr)) {
    fail(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " +
                             png.message);
  }
}

Tensor<float> resize_bilinear(const Tensor<float>& image, ImageSize size) {
  require(image.rank() == 3, ErrorCode::kShapeMismatch,
          "resize expects a C x H x W tensor");
  require(size.width >= 1 && size.height >= 1, ErrorCode::kInvalidArgument,
          "resize request has a zero dimension");
  const std::size_t channels = image.extent(0);
  const std::size_t src_h = image.extent(1);
  const std::size_t src_w = image.extent(2);
  Tensor<float> out({channels, size.height, size.width});
  const double sy = static_cast<double>(src_h) / size.height;
  const double sx = static_cast<double>(src_w) / size.width;

  auto sample = [](double pos, std::size_t extent, std::size_t& i0,
                   std::size_t& i1, double& frac) {
    pos = std::clamp(pos, 0.0, static_cast<double>(extent - 1));
    i0 = static_cast<std::size_t>(std::floor(pos));
    i1 = std::min(i0 + 1, extent - 1);
    frac = pos - static_cast<double>(i0);
  };

  for (std::size_t i = 0; i < size.height; ++i) {
    std::size_t y0, y1;
    double fy;
    sample((i + 0.5) * sy - 0.5, src_h, y0, y1, fy);
    for (std::size_t j = 0; j < size.width; ++j) {
      std::size_t x0, x1;
      double fx;
      sample((j + 0.5) * sx - 0.5, src_w, x0, x1, fx);
      for (std::size_t c = 0; c < channels; ++c) {
        const double top =
            image.at(c, y0, x0) * (1.0 - fx) + image.at(c, y0, x1) * fx;
        const double bottom =
            image.at(c, y1, x0) * (1.0 - fx) + image.at(c, y1, x1) * fx;
        out.at(c, i, j) = static_cast<float>(top * (1.0 - fy) + bottom * fy);
      }
    }
  }
  return out;
}

double psnr(const Tensor<float>& a, const Tensor<float>& b) {
  require_same_shape(a, b, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::clamp(a[i], 0.0f, 255.0f) -
                     std::clamp(b[i], 0.0f, 255.0f);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace randcnn
