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

#include "doctest.h"
#include "helpers.hpp"
#include "randcnn/image.hpp"
#include "randcnn/tasks.hpp"

using namespace randcnn;

namespace {

TaskOptions options(int iters) {
  TaskOptions o;
  o.budget.optim.max_iters = iters;
  return o;
}

Tensor<float> photo(const char* name, std::size_t size) {
  return load_image(testing::data_dir() / name, ImageSize{size, size});
}

// Root-mean-square deviation from each channel's mean.
double spread(const Tensor<float>& img) {
  const std::size_t plane = img.size() / 3;
  double var = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t k = 0; k < plane; ++k) mean += img[c * plane + k];
    mean /= static_cast<double>(plane);
    for (std::size_t k = 0; k < plane; ++k) {
      var += (img[c * plane + k] - mean) * (img[c * plane + k] - mean);
    }
  }
  return std::sqrt(var / static_cast<double>(img.size()));
}

}  // namespace

TEST_CASE("conv1_1 inversion recovers the source") {
  const auto spec = build_vgg19_spec("conv1_1");
  const auto ws = init_random_weights(spec, 0.015, 1);
  const auto src = photo("astronaut_128.png", 32);
  std::vector<int> snaps;
  auto opts = options(300);
  opts.snapshot_every = 10;
  const auto r = run_inversion(spec, ws, src, "conv1_1", opts,
                               [&](int it, const Tensor<float>& img) {
                                 snaps.push_back(it);
                                 CHECK(img.shape() == src.shape());
                               });
  CHECK(r.trace.rows.back().loss <= 1e-4 * r.trace.rows.front().loss);
  CHECK(psnr(r.image, src) > 25.0);
  REQUIRE(r.factors.size() == 1);
  CHECK(r.factors[0].kind == "omega");
  REQUIRE_FALSE(snaps.empty());
  CHECK(snaps.front() == 0);
  for (int s : snaps) CHECK(s % 10 == 0);
}

TEST_CASE("f64 tasks run end to end") {
  const auto spec = build_vgg19_spec("conv1_2");
  auto opts = options(5);
  opts.precision = Precision::kF64;
  const auto r = run_inversion(spec, init_random_weights(spec, 0.015, 2),
                               photo("coffee_128.png", 16), "conv1_2", opts);
  CHECK(r.trace.rows.back().loss < r.trace.rows.front().loss);
  CHECK(r.image.all_finite());
}

TEST_CASE("fc inversion rejects other sizes before computing") {
  const auto spec = build_vgg19_spec("fc6");
  WeightSet empty;
  try {
    run_inversion(spec, empty, photo("astronaut_128.png", 64), "fc6", options(5));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("texture of a constant image stays near constant") {
  const auto spec = build_vgg19_spec("conv2_1");
  const auto ws = init_random_weights(spec, 0.015, 3);
  Tensor<float> flat({3, 24, 24});
  for (std::size_t k = 0; k < 24 * 24; ++k) {
    flat[k] = 200;
    flat[576 + k] = 80;
    flat[1152 + k] = 40;
  }
  auto opts = options(200);
  const auto r = run_texture(spec, ws, flat, {"conv1_1", "conv2_1"}, opts);
  CHECK(r.trace.rows.back().loss <= 1e-3 * r.trace.rows.front().loss);
  const auto noise = white_noise_init<float>({3, 24, 24}, 0, 10.0);
  CHECK(spread(r.image) < spread(noise));
  REQUIRE(r.factors.size() == 2);
  CHECK(r.factors[0].kind == "mu");
}

TEST_CASE("self style transfer lowers the objective") {
  const auto spec = build_vgg19_spec("conv3_1");
  const auto ws = init_random_weights(spec, 0.015, 4);
  const auto img = photo("chelsea_128.png", 24);
  const auto r = run_style(spec, ws, img, img, "conv2_2", {"conv1_1", "conv2_1", "conv3_1"},
                           StyleWeights{}, options(60));
  CHECK(r.trace.rows.back().loss < r.trace.rows.front().loss);
  CHECK(psnr(r.image, img) > psnr(white_noise_init<float>(img.shape(), 0, 10.0), img));
  CHECK(r.factors.size() == 4);
}

TEST_CASE("total variation alone flattens the image") {
  const auto spec = build_vgg19_spec("conv1_1");
  const auto ws = init_random_weights(spec, 0.015, 5);
  const auto img = photo("gravel_128.png", 16);
  const auto r = run_style(spec, ws, img, img, "conv1_1", {"conv1_1"},
                           StyleWeights{0.0, 0.0, 1.0}, options(200));
  CHECK(r.final_terms.tv < 1e-3 * r.trace.rows.front().loss);
}

TEST_CASE("gradient self-check passes and catches a sign fault") {
  const auto f64 = run_gradcheck(1, 4, 16, Precision::kF64);
  CHECK(f64.passed);
  CHECK(f64.worst < 1e-6);
  CHECK(f64.entries.size() == 4);
  const auto f32 = run_gradcheck(2, 3, 12, Precision::kF32);
  CHECK(f32.passed);
  CHECK(f32.worst < 1e-3);
  CHECK_FALSE(run_gradcheck(1, 4, 16, Precision::kF64, true).passed);
  CHECK_FALSE(run_gradcheck(3, 2, 8, Precision::kF32, true).passed);
}

TEST_CASE("relative error over sampled coordinates") {
  const Tensor<double> a({3}, std::vector<double>{1, 2, 100});
  const Tensor<double> b({3}, std::vector<double>{1, 2, -7});
  CHECK(relative_error(a, b, {0, 1}) == 0.0);
  CHECK(relative_error(a, b, {2}) == doctest::Approx(107.0 / 100.0));
}
