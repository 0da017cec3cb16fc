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

#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "randcnn/image.hpp"
#include "randcnn/tensor.hpp"

using namespace randcnn;

TEST_CASE("tensor rejects inconsistent shapes") {
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>(3)), Error);
  CHECK_THROWS_AS(Tensor<float>(Shape{2, 0}), Error);
  CHECK_THROWS_AS(Tensor<float>(Shape{1, 1, 1, 1, 1}), Error);
  Tensor<float> t({2, 3});
  CHECK_THROWS_AS(t.reshape({4, 2}), Error);
  t.reshape({3, 2});
  CHECK(t.shape() == Shape{3, 2});
}

TEST_CASE("tensor arithmetic accumulates in double") {
  Tensor<float> a({3}, std::vector<float>{1, -2, 3});
  Tensor<float> b({3}, std::vector<float>{4, 5, -6});
  CHECK(dot(a, b) == doctest::Approx(-24));
  CHECK(squared_norm(a) == doctest::Approx(14));
  CHECK(sum(b) == doctest::Approx(3));
  CHECK(max_abs(b) == doctest::Approx(6));
  CHECK(mean_abs(a) == doctest::Approx(2));
  axpy(2.0, a, b);
  CHECK(b == Tensor<float>({3}, std::vector<float>{6, 1, 0}));
  CHECK(add(a, a) == scale(a, 2.0));
  CHECK(sub(a, a) == Tensor<float>({3}));
  CHECK_THROWS_AS(add(a, Tensor<float>({4})), Error);
}

TEST_CASE("rows and cols view a C x H x W tensor as N x M") {
  Tensor<float> t({4, 3, 5});
  CHECK(t.rows() == 4);
  CHECK(t.cols() == 15);
}

TEST_CASE("2x2 PPM decodes into planar RGB") {
  const auto dir = testing::scratch_dir("ppm");
  const auto path = dir / "tiny.ppm";
  {
    std::ofstream f(path, std::ios::binary);
    f << "P6\n# comment\n2 2\n255\n";
    const unsigned char px[] = {0, 0, 0, 255, 255, 255, 10, 20, 30, 40, 50, 60};
    f.write(reinterpret_cast<const char*>(px), sizeof px);
  }
  const auto img = load_image(path);
  REQUIRE(img.shape() == Shape{3, 2, 2});
  const float expect[4][3] = {{0, 0, 0}, {255, 255, 255}, {10, 20, 30}, {40, 50, 60}};
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(img.at(c, p / 2, p % 2) == expect[p][c]);
    }
  }
}

TEST_CASE("load with resize yields the requested shape") {
  const auto img = load_image(testing::data_dir() / "astronaut_128.png", ImageSize{256, 256});
  CHECK(img.shape() == Shape{3, 256, 256});
  const auto odd = load_image(testing::data_dir() / "astronaut_128.png", ImageSize{40, 24});
  CHECK(odd.shape() == Shape{3, 24, 40});
}

TEST_CASE("solid gray PNG round trips") {
  const auto dir = testing::scratch_dir("gray");
  save_image(Tensor<float>({3, 64, 64}, 128.0f), dir / "gray.png");
  const auto img = load_image(dir / "gray.png");
  REQUIRE(img.shape() == Shape{3, 64, 64});
  for (float v : img.values()) CHECK(v == 128.0f);
}

TEST_CASE("save clamps and rounds") {
  const auto dir = testing::scratch_dir("clamp");
  Tensor<float> img({3, 1, 4});
  const float in[4] = {300.0f, -4.0f, 127.4f, 127.6f};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 4; ++j) img.at(c, 0, j) = in[j];
  }
  save_image(img, dir / "clamp.png");
  const auto back = load_image(dir / "clamp.png");
  CHECK(back.at(0, 0, 0) == 255.0f);
  CHECK(back.at(1, 0, 1) == 0.0f);
  CHECK(back.at(2, 0, 2) == 127.0f);
  CHECK(back.at(0, 0, 3) == 128.0f);
}

TEST_CASE("unsupported and missing files raise structured errors") {
  const auto dir = testing::scratch_dir("bad");
  {
    std::ofstream f(dir / "x.bmp");
    f << "BMnot an image";
  }
  try {
    load_image(dir / "x.bmp");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedFormat);
  }
  CHECK_THROWS_AS(load_image(dir / "missing.png"), Error);
}

TEST_CASE("preprocess subtracts the channel mean") {
  ImageMeta meta{8, 8, {124, 117, 104}};
  Tensor<float> img({3, 8, 8});
  for (std::size_t k = 0; k < 64; ++k) {
    img[k] = 124;
    img[64 + k] = 117;
    img[128 + k] = 104;
  }
  const auto centred = preprocess(img, meta);
  for (float v : centred.values()) CHECK(v == 0.0f);

  ImageMeta meta100{8, 8, {100, 100, 100}};
  const auto white = preprocess(Tensor<float>({3, 8, 8}, 255.0f), meta100);
  for (float v : white.values()) CHECK(v == 155.0f);
}

TEST_CASE("deprocess adds the channel mean back") {
  ImageMeta meta{8, 8, {124, 117, 104}};
  const auto out = deprocess(Tensor<float>({3, 8, 8}), meta);
  CHECK(out.at(0, 3, 3) == 124.0f);
  CHECK(out.at(1, 0, 7) == 117.0f);
  CHECK(out.at(2, 7, 0) == 104.0f);
  Tensor<float> neg({3, 8, 8});
  neg[0] = -124.0f;
  CHECK(deprocess(neg, meta)[0] == 0.0f);
}

TEST_CASE("deprocess inverts preprocess") {
  // Decoded pixels are whole numbers, for which the round trip is exact.
  auto img = testing::random_tensor<float>({3, 9, 11}, 5, 0, 255);
  for (auto& v : img.values()) v = std::round(v);
  const ImageMeta meta = ImageMeta::for_image(img);
  CHECK(deprocess(preprocess(img, meta), meta) == img);
}

TEST_CASE("image metadata is validated") {
  CHECK_THROWS_AS((ImageMeta{4, 4, kDefaultMeanRgb}.validate()), Error);
  CHECK_THROWS_AS((ImageMeta{8, 8, {300, 0, 0}}.validate()), Error);
  CHECK_THROWS_AS(preprocess(Tensor<float>({3, 8, 9}), ImageMeta{8, 8}), Error);
}

TEST_CASE("psnr of identical images is infinite and finite otherwise") {
  Tensor<float> a({3, 8, 8}, 100.0f);
  Tensor<float> b({3, 8, 8}, 110.0f);
  CHECK(std::isinf(psnr(a, a)));
  // MSE 100 -> 10 log10(255^2 / 100)
  CHECK(psnr(a, b) == doctest::Approx(28.1308).epsilon(1e-4));
}
