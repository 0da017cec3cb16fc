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

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "randcnn/randcnn.h"

namespace {

std::string data(const char* name) { return std::string(RANDCNN_TEST_DATA_DIR) + "/" + name; }

std::string scratch(const char* name) {
  return std::string(RANDCNN_TEST_SCRATCH_DIR) + "/capi_" + name;
}

randcnn_task_options quick(uint32_t iters) {
  randcnn_task_options o;
  randcnn_task_options_default(&o);
  o.max_iters = iters;
  return o;
}

}  // namespace

TEST_CASE("status names and versions") {
  CHECK(std::strcmp(randcnn_version(), "0.1.0") == 0);
  CHECK(std::strcmp(randcnn_status_name(RANDCNN_OK), "ok") == 0);
  CHECK(std::strlen(randcnn_status_name(RANDCNN_NOT_A_WEIGHT_FILE)) > 0);
}

TEST_CASE("null arguments are rejected with a message") {
  CHECK(randcnn_image_load(nullptr, 0, 0, nullptr) == RANDCNN_INVALID_ARGUMENT);
  CHECK(std::strlen(randcnn_last_error()) > 0);
  randcnn_image* img = nullptr;
  CHECK(randcnn_image_load("/nonexistent.png", 0, 0, &img) == RANDCNN_IO);
  CHECK(img == nullptr);
}

TEST_CASE("image handles") {
  randcnn_image* img = nullptr;
  REQUIRE(randcnn_image_load(data("astronaut_128.png").c_str(), 32, 24, &img) == RANDCNN_OK);
  CHECK(randcnn_image_width(img) == 32);
  CHECK(randcnn_image_height(img) == 24);
  randcnn_image* big = nullptr;
  REQUIRE(randcnn_image_resize(img, 64, 64, &big) == RANDCNN_OK);
  CHECK(randcnn_image_width(big) == 64);
  const std::vector<float> px(3 * 8 * 8, 42.0f);
  randcnn_image* flat = nullptr;
  REQUIRE(randcnn_image_from_data(px.data(), 8, 8, &flat) == RANDCNN_OK);
  CHECK(randcnn_image_data(flat)[100] == 42.0f);
  CHECK(randcnn_image_save(flat, scratch("flat.png").c_str()) == RANDCNN_OK);
  randcnn_image_free(flat);
  randcnn_image_free(big);
  randcnn_image_free(img);
}

TEST_CASE("layer listing") {
  CHECK(randcnn_vgg19_layer_count(0) == 37);
  CHECK(randcnn_vgg19_layer_count(1) == 42);
  CHECK(std::strcmp(randcnn_vgg19_layer_name(0, 0), "conv1_1") == 0);
  CHECK(randcnn_vgg19_layer_name(0, 999) == nullptr);
}

TEST_CASE("weights round trip through files") {
  randcnn_weights* w = nullptr;
  REQUIRE(randcnn_weights_random("conv2_1", 0.015, 11, &w) == RANDCNN_OK);
  CHECK(randcnn_weights_layer_count(w) == 3);
  CHECK(std::strcmp(randcnn_weights_layer_name(w, 2), "conv2_1") == 0);
  CHECK(randcnn_weights_validate(w, "conv2_1") == RANDCNN_OK);
  CHECK(randcnn_weights_validate(w, "conv3_1") != RANDCNN_OK);
  const auto path = scratch("w.bin");
  REQUIRE(randcnn_weights_save(w, path.c_str()) == RANDCNN_OK);
  randcnn_weights* back = nullptr;
  REQUIRE(randcnn_weights_load(path.c_str(), &back) == RANDCNN_OK);
  uint64_t seed = 0;
  double sigma = 0;
  randcnn_scheme scheme = RANDCNN_SCHEME_STACKED;
  randcnn_weights_provenance(back, &seed, &sigma, &scheme);
  CHECK(seed == 11);
  CHECK(sigma == 0.015);
  CHECK(scheme == RANDCNN_SCHEME_PURE_RANDOM);
  randcnn_weights_free(back);
  randcnn_weights_free(w);

  { std::ofstream(scratch("junk.bin")) << "not weights at all"; }
  CHECK(randcnn_weights_load(scratch("junk.bin").c_str(), &back) == RANDCNN_NOT_A_WEIGHT_FILE);
}

TEST_CASE("inversion through the C API") {
  randcnn_image* img = nullptr;
  REQUIRE(randcnn_image_load(data("coffee_128.png").c_str(), 24, 24, &img) == RANDCNN_OK);
  randcnn_weights* w = nullptr;
  REQUIRE(randcnn_weights_random("conv1_2", 0.015, 3, &w) == RANDCNN_OK);
  auto opts = quick(20);
  opts.snapshot_every = 5;
  int snaps = 0;
  randcnn_result* r = nullptr;
  REQUIRE(randcnn_invert(
              w, img, "conv1_2", &opts,
              [](uint32_t, const randcnn_image* im, void* user) {
                ++*static_cast<int*>(user);
                CHECK(randcnn_image_width(im) == 24);
              },
              &snaps, &r) == RANDCNN_OK);
  CHECK(snaps >= 4);
  const size_t n = randcnn_result_trace_length(r);
  REQUIRE(n >= 2);
  CHECK(randcnn_result_trace_row(r, n - 1).loss < randcnn_result_trace_row(r, 0).loss);
  CHECK(randcnn_result_factor_count(r) == 1);
  CHECK(std::strcmp(randcnn_result_factor_kind(r, 0), "omega") == 0);
  CHECK(randcnn_result_factor_value(r, 0) > 0);
  CHECK(randcnn_image_width(randcnn_result_image(r)) == 24);
  CHECK(randcnn_result_write_trace(r, scratch("trace.csv").c_str()) == RANDCNN_OK);
  randcnn_result_free(r);

  r = nullptr;
  CHECK(randcnn_invert(w, img, "conv5_1", &opts, nullptr, nullptr, &r) != RANDCNN_OK);
  CHECK(r == nullptr);
  CHECK(randcnn_invert(w, img, "fc6", &opts, nullptr, nullptr, &r) == RANDCNN_SHAPE_MISMATCH);
  randcnn_weights_free(w);
  randcnn_image_free(img);
}

TEST_CASE("texture and style through the C API") {
  randcnn_image* img = nullptr;
  REQUIRE(randcnn_image_load(data("gravel_128.png").c_str(), 16, 16, &img) == RANDCNN_OK);
  randcnn_weights* w = nullptr;
  REQUIRE(randcnn_weights_random("conv3_1", 0.015, 5, &w) == RANDCNN_OK);
  const auto opts = quick(10);
  const char* layers[] = {"conv1_1", "conv2_1"};
  randcnn_result* r = nullptr;
  REQUIRE(randcnn_texture(w, img, layers, 2, &opts, nullptr, nullptr, &r) == RANDCNN_OK);
  CHECK(randcnn_result_factor_count(r) == 2);
  randcnn_result_free(r);
  const char* style_layers[] = {"conv1_1", "conv2_1", "conv3_1"};
  REQUIRE(randcnn_style(w, img, img, "conv2_2", style_layers, 3, 100, 1, 1000, &opts, nullptr,
                        nullptr, &r) == RANDCNN_OK);
  double c = 0, t = 0, tv = 0;
  randcnn_result_terms(r, &c, &t, &tv);
  CHECK(c >= 0);
  CHECK(t >= 0);
  CHECK(tv > 0);
  randcnn_result_free(r);
  CHECK(randcnn_texture(w, img, layers, 0, &opts, nullptr, nullptr, &r) == RANDCNN_INVALID_ARGUMENT);
  randcnn_weights_free(w);
  randcnn_image_free(img);
}

TEST_CASE("stacking and variance through the C API") {
  randcnn_image* img = nullptr;
  REQUIRE(randcnn_image_load(data("chelsea_128.png").c_str(), 16, 16, &img) == RANDCNN_OK);
  const auto opts = quick(5);
  randcnn_weights* w = nullptr;
  randcnn_stack_report* rep = nullptr;
  REQUIRE(randcnn_stack(img, "chelsea", "conv1_2", 2, 0.015, 9, &opts, &w, &rep) == RANDCNN_OK);
  const auto doc = nlohmann::json::parse(randcnn_stack_report_json(rep));
  CHECK(doc["layers"].size() == 2);
  randcnn_scheme scheme{};
  randcnn_weights_provenance(w, nullptr, nullptr, &scheme);
  CHECK(scheme == RANDCNN_SCHEME_STACKED);

  const randcnn_weights* schemes[] = {w, nullptr};
  const uint64_t seeds[] = {1, 2};
  double losses[4] = {};
  REQUIRE(randcnn_compare_variance(img, "conv1_2", schemes, 2, seeds, 2, 0.015, &opts, losses) ==
          RANDCNN_OK);
  for (double l : losses) CHECK(l >= 0);
  CHECK(randcnn_compare_variance(img, "conv1_2", schemes, 2, seeds, 1, 0.015, &opts, losses) ==
        RANDCNN_INVALID_ARGUMENT);
  randcnn_stack_report_free(rep);
  randcnn_weights_free(w);
  randcnn_image_free(img);
}

TEST_CASE("gradient check through the C API") {
  randcnn_gradcheck_report rep{};
  CHECK(randcnn_gradcheck(1, 3, 12, RANDCNN_F64, 0, &rep) == RANDCNN_OK);
  CHECK(rep.passed == 1);
  CHECK(rep.worst < 1e-6);
  CHECK(randcnn_gradcheck(1, 3, 12, RANDCNN_F64, 1, &rep) == RANDCNN_THRESHOLD_BREACHED);
  CHECK(rep.passed == 0);
  CHECK(randcnn_gradcheck(1, 9, 12, RANDCNN_F64, 0, &rep) == RANDCNN_INVALID_ARGUMENT);
}
