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
#include <functional>
#include <string>
#include <vector>

#include "randcnn/network_spec.hpp"
#include "randcnn/optimizer.hpp"
#include "randcnn/weights.hpp"

namespace randcnn {

struct InversionBudget {
  OptimConfig optim;
  double noise_amplitude = 10.0;
};

struct StackedLayerRecord {
  std::string layer;
  std::vector<std::uint64_t> candidate_seeds;
  std::vector<double> candidate_losses;  // +inf marks a failed candidate
  std::size_t chosen = 0;
};

struct StackingReport {
  std::vector<StackedLayerRecord> layers;
  std::string reference;  // identifier of the reference image
  std::size_t candidates = 0;
  InversionBudget budget;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

// Unweighted (omega = 1) content inversion of `reference` from `layer`,
// starting at white noise seeded by budget.optim.seed. Returns the final
// content loss.
double inversion_loss(const NetworkSpec& spec, const WeightSet& weights,
                      const Tensor<float>& reference, const std::string& layer,
                      const InversionBudget& budget);

// Greedy layer-by-layer selection: for each conv layer of `spec` in order,
// draw `k` candidates seeded by derive_seed(seed, layer index, candidate),
// score each by inversion_loss at that layer with the earlier layers frozen,
// and keep the lowest. `reference` is a preprocessed 3 x H x W image.
struct StackedResult {
  WeightSet weights;
  StackingReport report;
};

StackedResult build_stacked(const NetworkSpec& spec, const Tensor<float>& reference,
                            std::size_t k, const InversionBudget& budget,
                            double sigma, std::uint64_t seed,
                            std::string reference_id = "reference");

// Same construction without selection pressure: layer i gets the weights of
// candidate 0 under the derived per-layer seed.
WeightSet derived_seed_weights(const NetworkSpec& spec, double sigma,
                               std::uint64_t seed);

struct WeightSchemeSource {
  std::string name;
  // Weight set to evaluate for a given run seed. Fixed schemes ignore it.
  std::function<WeightSet(std::uint64_t seed)> weights_for;
};

struct VarianceRow {
  std::string scheme;
  std::uint64_t seed = 0;
  double loss = 0.0;
};

struct VarianceSummary {
  std::string scheme;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

struct VarianceTable {
  std::vector<VarianceRow> rows;
  std::vector<VarianceSummary> summaries;

  std::string to_csv() const;
};

// For each scheme and seed: invert `image` at `layer` (noise seed = run seed)
// and collect the final loss, then summarize per scheme.
VarianceTable compare_variance(const NetworkSpec& spec, const Tensor<float>& image,
                               const std::vector<WeightSchemeSource>& schemes,
                               const std::vector<std::uint64_t>& seeds,
                               const std::string& layer, const InversionBudget& budget);

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace randcnn
