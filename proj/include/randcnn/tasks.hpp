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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "randcnn/image.hpp"
#include "randcnn/network_spec.hpp"
#include "randcnn/objectives.hpp"
#include "randcnn/optimizer.hpp"
#include "randcnn/stacker.hpp"
#include "randcnn/weights.hpp"

namespace randcnn {

enum class Precision { kF32, kF64 };

struct TaskOptions {
  InversionBudget budget;
  std::array<double, 3> mean_rgb = kDefaultMeanRgb;
  Precision precision = Precision::kF32;
  int snapshot_every = 0;  // 0 disables snapshots
};

struct WeightFactor {
  std::string layer;
  std::string kind;  // "omega" or "mu"
  double value = 0.0;
};

struct TaskResult {
  Tensor<float> image;  // 0-255 scale, unclamped
  OptimTrace trace;
  std::vector<WeightFactor> factors;
  ObjectiveTerms final_terms;
};

// Receives the current iterate decoded to 0-255.
using SnapshotFn = std::function<void(int iteration, const Tensor<float>& image)>;

// `spec` is the full topology; each task truncates it to the deepest layer
// it needs. Images are 3 x H x W in the 0-255 scale.
// Throws kShapeMismatch when `image` cannot feed the network truncated at
// `deepest_layer`, such as a non-256x256 image with fc layers.
void check_task_input(const NetworkSpec& spec, const std::string& deepest_layer,
                      const Tensor<float>& image);

TaskResult run_inversion(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor<float>& image, const std::string& layer,
                         const TaskOptions& options, const SnapshotFn& snapshot = {});

TaskResult run_texture(const NetworkSpec& spec, const WeightSet& weights,
                       const Tensor<float>& texture,
                       const std::vector<std::string>& layers,
                       const TaskOptions& options, const SnapshotFn& snapshot = {});

struct StyleWeights {
  double alpha = 100.0;
  double beta = 1.0;
  double gamma = 1000.0;
};

// The style image is bilinearly resized to the content image when needed.
TaskResult run_style(const NetworkSpec& spec, const WeightSet& weights,
                     const Tensor<float>& content, const Tensor<float>& style,
                     const std::string& content_layer,
                     const std::vector<std::string>& style_layers,
                     const StyleWeights& mix, const TaskOptions& options,
                     const SnapshotFn& snapshot = {});

struct GradcheckEntry {
  std::string objective;
  double rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double worst = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string network;  // human-readable layer list
};

// Builds a random conv/relu/pool net of `depth` conv layers on a
// size x size x 3 input and compares analytic input gradients of the
// content, texture, TV and combined objectives against central differences
// at sampled coordinates. f32 gradients are checked against f64 differences.
GradcheckReport run_gradcheck(std::uint64_t seed, int depth, int size,
                              Precision precision, bool inject_fault = false);

// ||a - b|| / max(||a||, ||b||) over the given coordinates.
double relative_error(const Tensor<double>& analytic, const Tensor<double>& numeric,
                      const std::vector<std::size_t>& coords);

}  // namespace randcnn
