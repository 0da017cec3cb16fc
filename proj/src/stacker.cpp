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

#include "randcnn/stacker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <atomic>
#include <thread>

#include <json.hpp>

#include "randcnn/network.hpp"
#include "randcnn/objectives.hpp"
#include "randcnn/parallel.hpp"

namespace randcnn {
namespace {

nlohmann::json loss_to_json(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

// Runs job(i) for i in [0, n) on up to thread_limit() threads. Results are
// written by index, so completion order does not matter.
template <typename Job>
void for_each_index(std::size_t n, Job&& job) {
  const std::size_t workers = std::min(n, thread_limit());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
}

}  // namespace

double inversion_loss(const NetworkSpec& spec, const WeightSet& weights,
                      const Tensor<float>& reference, const std::string& layer,
                      const InversionBudget& budget) {
  const Network<float> net(spec.truncated(layer), weights);
  ContentTarget<float> target{layer, net.forward(reference, layer).at(layer), 1.0};
  ObjectiveFn<float> objective = [&](const Tensor<float>& x) {
    const auto cache = net.forward(x, layer);
    auto lg = content_loss_and_grad(cache.at(layer), target);
    LayerGradients<float> grads;
    grads.emplace_back(layer, std::move(lg.grad));
    return LossAndGrad<float>{lg.loss, net.backward_to_input(cache, grads)};
  };
  auto init = white_noise_init<float>(reference.shape(), budget.optim.seed,
                                      budget.noise_amplitude);
  return lbfgs_minimize(objective, std::move(init), budget.optim).loss;
}

WeightSet derived_seed_weights(const NetworkSpec& spec, double sigma,
                               std::uint64_t seed) {
  spec.validate();
  WeightSet ws;
  ws.provenance = {seed, sigma, WeightScheme::kPureRandom};
  std::uint64_t index = 0;
  for (const auto& layer : spec.layers) {
    if (!layer.has_weights()) continue;
    Rng rng(derive_seed(seed, index++, 0));
    ws.layers.push_back(init_layer_weights(layer, sigma, rng));
  }
  return ws;
}

StackedResult build_stacked(const NetworkSpec& spec, const Tensor<float>& reference,
                            std::size_t k, const InversionBudget& budget,
                            double sigma, std::uint64_t seed,
                            std::string reference_id) {
  require(k >= 1, ErrorCode::kInvalidArgument, "need at least one candidate per layer");
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument,
          "sigma must be positive");
  spec.validate();
  budget.optim.validate();

  StackedResult out;
  out.weights.provenance = {seed, sigma, WeightScheme::kStacked};
  out.report.reference = std::move(reference_id);
  out.report.candidates = k;
  out.report.budget = budget;
  out.report.sigma = sigma;
  out.report.seed = seed;

  std::uint64_t index = 0;
  for (const auto& layer : spec.layers) {
    if (!layer.has_weights()) continue;
    const std::uint64_t layer_index = index++;
    if (layer.kind == LayerKind::kFc) {
      Rng rng(derive_seed(seed, layer_index, 0));
      out.weights.layers.push_back(init_layer_weights(layer, sigma, rng));
      continue;
    }

    StackedLayerRecord record;
    record.layer = layer.name;
    std::vector<LayerWeights> candidates;
    for (std::size_t c = 0; c < k; ++c) {
      record.candidate_seeds.push_back(derive_seed(seed, layer_index, c));
      Rng rng(record.candidate_seeds.back());
      candidates.push_back(init_layer_weights(layer, sigma, rng));
    }
    record.candidate_losses.assign(k, std::numeric_limits<double>::infinity());

    const std::string rep = spec.truncated(layer.name).layers.back().name;
    for_each_index(k, [&](std::size_t c) {
      WeightSet trial = out.weights;
      trial.layers.push_back(candidates[c]);
      try {
        record.candidate_losses[c] = inversion_loss(spec, trial, reference, rep, budget);
      } catch (const Error&) {
        // a failed candidate keeps +inf
      }
    });

    record.chosen = static_cast<std::size_t>(
        std::min_element(record.candidate_losses.begin(),
                         record.candidate_losses.end()) -
        record.candidate_losses.begin());
    out.weights.layers.push_back(std::move(candidates[record.chosen]));
    out.report.layers.push_back(std::move(record));
  }
  return out;
}

std::string StackingReport::to_json() const {
  nlohmann::json j;
  j["reference"] = reference;
  j["candidates"] = candidates;
  j["sigma"] = sigma;
  j["seed"] = seed;
  j["budget"] = {{"max_iters", budget.optim.max_iters},
                 {"history", budget.optim.history},
                 {"tolerance", budget.optim.tolerance},
                 {"wolfe_c1", budget.optim.line_search.sufficient_decrease},
                 {"wolfe_c2", budget.optim.line_search.curvature},
                 {"init_seed", budget.optim.seed},
                 {"noise_amplitude", budget.noise_amplitude}};
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json losses = nlohmann::json::array();
    for (double v : l.candidate_losses) losses.push_back(loss_to_json(v));
    j["layers"].push_back({{"layer", l.layer},
                           {"candidate_seeds", l.candidate_seeds},
                           {"candidate_losses", losses},
                           {"chosen", l.chosen}});
  }
  return j.dump(2);
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

VarianceTable compare_variance(const NetworkSpec& spec, const Tensor<float>& image,
                               const std::vector<WeightSchemeSource>& schemes,
                               const std::vector<std::uint64_t>& seeds,
                               const std::string& layer, const InversionBudget& budget) {
  require(seeds.size() >= 2, ErrorCode::kInvalidArgument,
          "variance comparison needs at least two seeds per scheme");
  require(!schemes.empty(), ErrorCode::kInvalidArgument, "no weight schemes given");
  VarianceTable table;
  table.rows.resize(schemes.size() * seeds.size());
  for_each_index(table.rows.size(), [&](std::size_t i) {
    const auto& scheme = schemes[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    InversionBudget run = budget;
    run.optim.seed = seed;
    table.rows[i] = {scheme.name, seed,
                     inversion_loss(spec, scheme.weights_for(seed), image, layer, run)};
  });
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    std::vector<double> losses;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      losses.push_back(table.rows[s * seeds.size() + k].loss);
    }
    VarianceSummary summary;
    summary.scheme = schemes[s].name;
    summary.min = quantile(losses, 0.0);
    summary.q1 = quantile(losses, 0.25);
    summary.median = quantile(losses, 0.5);
    summary.q3 = quantile(losses, 0.75);
    summary.max = quantile(losses, 1.0);
    double acc = 0.0;
    for (double v : losses) acc += v;
    summary.mean = acc / static_cast<double>(losses.size());
    table.summaries.push_back(summary);
  }
  return table;
}

std::string VarianceTable::to_csv() const {
  std::string out = "scheme,seed,loss\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%llu,%.17g\n", r.scheme.c_str(),
                  static_cast<unsigned long long>(r.seed), r.loss);
    out += buf;
  }
  return out;
}

}  // namespace randcnn
