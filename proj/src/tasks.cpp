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

#include "randcnn/tasks.hpp"

#include <cmath>

#include "randcnn/network.hpp"
#include "randcnn/rng.hpp"

namespace randcnn {
namespace {

template <typename T>
ObjectiveConfig<double> to_f64(const ObjectiveConfig<T>& cfg) {
  ObjectiveConfig<double> out;
  out.alpha = cfg.alpha;
  out.beta = cfg.beta;
  out.gamma = cfg.gamma;
  if (cfg.content) {
    out.content = ContentTarget<double>{cfg.content->layer,
                                        cfg.content->features.template cast<double>(),
                                        cfg.content->omega};
  }
  if (cfg.style) {
    StyleTarget<double> st;
    for (const auto& l : cfg.style->layers) {
      st.layers.push_back({l.layer, l.gram.template cast<double>(), l.mu});
    }
    out.style = std::move(st);
  }
  return out;
}

void check_fixed_input(const NetworkSpec& spec, const Tensor<float>& image) {
  require(image.rank() == 3 && image.extent(0) == 3, ErrorCode::kShapeMismatch,
          "expected a 3 x H x W RGB image");
  if (spec.input_size) {
    require(image.extent(1) == spec.input_size->height &&
                image.extent(2) == spec.input_size->width,
            ErrorCode::kShapeMismatch,
            "inverting fully connected layers requires a " +
                std::to_string(spec.input_size->height) + "x" +
                std::to_string(spec.input_size->width) + " input image, got " +
                std::to_string(image.extent(1)) + "x" +
                std::to_string(image.extent(2)));
  }
}

std::string deepest_of(const NetworkSpec& spec, const std::vector<std::string>& layers) {
  require(!layers.empty(), ErrorCode::kInvalidArgument, "no layers selected");
  std::size_t best = spec.index_of(layers.front());
  for (const auto& l : layers) best = std::max(best, spec.index_of(l));
  return spec.layers[best].name;
}

// Truncated spec for the task, with a clear error ahead of any compute when
// fc layers force the input size.
NetworkSpec task_spec(const NetworkSpec& spec, const std::string& deepest,
                      const Tensor<float>& image) {
  NetworkSpec out = spec.truncated(deepest);
  check_fixed_input(out, image);
  return out;
}

template <typename T>
TaskResult optimize(const Network<T>& net, const ObjectiveConfig<T>& cfg,
                    const ImageMeta& meta, const TaskOptions& options,
                    const SnapshotFn& snapshot, std::vector<WeightFactor> factors) {
  ObjectiveFn<T> objective = [&](const Tensor<T>& x) {
    return style_objective(x, cfg, net);
  };
  IterationCallback<T> on_iteration;
  if (snapshot && options.snapshot_every > 0) {
    on_iteration = [&](const TraceRow& row, const Tensor<T>& x) {
      if (row.iteration % options.snapshot_every == 0) {
        snapshot(row.iteration, deprocess(x, meta).template cast<float>());
      }
    };
  }
  auto init = white_noise_init<T>({3, meta.height, meta.width},
                                  options.budget.optim.seed,
                                  options.budget.noise_amplitude);
  auto result = lbfgs_minimize(objective, std::move(init), options.budget.optim,
                               on_iteration);
  TaskResult out;
  style_objective(result.x, cfg, net, &out.final_terms);
  out.image = deprocess(result.x, meta).template cast<float>();
  out.trace = std::move(result.trace);
  out.factors = std::move(factors);
  return out;
}

template <typename T>
TaskResult inversion_impl(const NetworkSpec& spec, const WeightSet& weights,
                          const Tensor<float>& image, const std::string& layer,
                          const TaskOptions& options, const SnapshotFn& snapshot) {
  const Network<T> net(task_spec(spec, layer, image), weights);
  const ImageMeta meta = ImageMeta::for_image(image, options.mean_rgb);
  const Tensor<T> x0 = preprocess(image.cast<T>(), meta);
  const auto cache = net.forward(x0, layer);
  const double omega =
      1.0 / mean_abs(content_probe_gradient(net, cache, layer, 1.0));
  require(std::isfinite(omega), ErrorCode::kUnnormalizableLayer,
          "content probe vanishes at layer '" + layer + "'");

  ObjectiveConfig<T> cfg;
  cfg.content = ContentTarget<T>{layer, cache.at(layer), omega};
  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  cfg.gamma = 0.0;
  return optimize(net, cfg, meta, options, snapshot, {{layer, "omega", omega}});
}

template <typename T>
StyleTarget<T> style_targets(const Network<T>& net, const Tensor<T>& x,
                             const std::vector<std::string>& layers,
                             std::vector<WeightFactor>& factors) {
  const auto cache = net.forward(x, deepest_of(net.spec(), layers));
  StyleTarget<T> target;
  for (const auto& l : layers) {
    const double mu = 1.0 / mean_abs(texture_probe_gradient(net, cache, l, 1.0));
    require(std::isfinite(mu), ErrorCode::kUnnormalizableLayer,
            "texture probe vanishes at layer '" + l + "'");
    target.layers.push_back({l, gram(cache.at(l)), mu});
    factors.push_back({l, "mu", mu});
  }
  return target;
}

template <typename T>
TaskResult texture_impl(const NetworkSpec& spec, const WeightSet& weights,
                        const Tensor<float>& texture,
                        const std::vector<std::string>& layers,
                        const TaskOptions& options, const SnapshotFn& snapshot) {
  const Network<T> net(task_spec(spec, deepest_of(spec, layers), texture), weights);
  const ImageMeta meta = ImageMeta::for_image(texture, options.mean_rgb);
  std::vector<WeightFactor> factors;
  ObjectiveConfig<T> cfg;
  cfg.style = style_targets(net, preprocess(texture.cast<T>(), meta), layers, factors);
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  cfg.gamma = 0.0;
  return optimize(net, cfg, meta, options, snapshot, std::move(factors));
}

template <typename T>
TaskResult style_impl(const NetworkSpec& spec, const WeightSet& weights,
                      const Tensor<float>& content, const Tensor<float>& style,
                      const std::string& content_layer,
                      const std::vector<std::string>& style_layers,
                      const StyleWeights& mix, const TaskOptions& options,
                      const SnapshotFn& snapshot) {
  std::vector<std::string> all = style_layers;
  all.push_back(content_layer);
  const Network<T> net(task_spec(spec, deepest_of(spec, all), content), weights);
  const ImageMeta meta = ImageMeta::for_image(content, options.mean_rgb);

  Tensor<float> style_sized = style;
  if (style.shape() != content.shape()) {
    style_sized = resize_bilinear(style, {meta.width, meta.height});
  }

  std::vector<WeightFactor> factors;
  ObjectiveConfig<T> cfg;
  cfg.alpha = mix.alpha;
  cfg.beta = mix.beta;
  cfg.gamma = mix.gamma;
  {
    const Tensor<T> xc = preprocess(content.cast<T>(), meta);
    const auto cache = net.forward(xc, content_layer);
    const double omega =
        1.0 / mean_abs(content_probe_gradient(net, cache, content_layer, 1.0));
    require(std::isfinite(omega), ErrorCode::kUnnormalizableLayer,
            "content probe vanishes at layer '" + content_layer + "'");
    cfg.content = ContentTarget<T>{content_layer, cache.at(content_layer), omega};
    factors.push_back({content_layer, "omega", omega});
  }
  cfg.style = style_targets(net, preprocess(style_sized.cast<T>(), meta),
                            style_layers, factors);
  return optimize(net, cfg, meta, options, snapshot, std::move(factors));
}

template <typename T>
double check_objective(const Network<T>& net, const Network<double>& net64,
                       const ObjectiveConfig<T>& cfg, const Tensor<double>& x,
                       const std::vector<std::size_t>& coords) {
  const auto analytic =
      style_objective(x.cast<T>(), cfg, net).grad.template cast<double>();
  const ObjectiveConfig<double> cfg64 = to_f64(cfg);
  const std::function<double(const Tensor<double>&)> loss =
      [&](const Tensor<double>& p) { return style_objective(p, cfg64, net64).loss; };
  const auto numeric = finite_diff_grad(loss, x, 1e-4, coords);
  return relative_error(analytic, numeric, coords);
}

template <typename T>
GradcheckReport gradcheck_impl(const NetworkSpec& spec, const WeightSet& weights,
                               std::uint64_t seed, int size, bool inject_fault) {
  Network<T> net(spec, weights);
  net.set_backward_sign_fault(inject_fault);
  const Network<double> net64(spec, weights);

  const Shape shape{3, static_cast<std::size_t>(size), static_cast<std::size_t>(size)};
  // Inputs are rounded through T so both precisions see the same point.
  const Tensor<T> x = white_noise_init<T>(shape, seed + 1, 50.0);
  const Tensor<T> target = white_noise_init<T>(shape, seed + 2, 50.0);
  const Tensor<double> x64 = x.template cast<double>();

  std::vector<std::string> reps;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::kConv3x3) reps.push_back(l.name);
  }
  const std::string deepest = spec.layers.back().name;
  const auto tcache = net.forward(target, deepest);

  ContentTarget<T> content{reps.back(), tcache.at(reps.back()), 1.0};
  content.omega = 1.0 / mean_abs(content_probe_gradient(net, tcache, reps.back(), 1.0));
  StyleTarget<T> style;
  for (const auto& r : reps) {
    const double mu = 1.0 / mean_abs(texture_probe_gradient(net, tcache, r, 1.0));
    style.layers.push_back({r, gram(tcache.at(r)), mu});
  }
  Rng rng(seed + 3);
  std::vector<std::size_t> coords;
  for (int i = 0; i < 10; ++i) coords.push_back(rng.next_u64() % x.size());

  GradcheckReport report;
  auto add = [&](const std::string& name, double alpha, double beta, double gamma,
                 std::optional<ContentTarget<T>> c, std::optional<StyleTarget<T>> s) {
    ObjectiveConfig<T> cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.content = std::move(c);
    cfg.style = std::move(s);
    report.entries.push_back({name, check_objective(net, net64, cfg, x64, coords)});
  };
  add("content", 1.0, 0.0, 0.0, content, std::nullopt);
  add("texture", 0.0, 1.0, 0.0, std::nullopt, style);
  add("tv", 0.0, 0.0, 1.0, content, std::nullopt);
  ContentTarget<T> mid = content;
  if (reps.size() > 1) {
    const std::string& layer = reps[reps.size() / 2];
    mid = {layer, tcache.at(layer),
           1.0 / mean_abs(content_probe_gradient(net, tcache, layer, 1.0))};
  }
  add("combined", 1.0, 1.0, 0.01, mid, style);
  return report;
}

}  // namespace

void check_task_input(const NetworkSpec& spec, const std::string& deepest_layer,
                      const Tensor<float>& image) {
  task_spec(spec, deepest_layer, image);
}

TaskResult run_inversion(const NetworkSpec& spec, const WeightSet& weights,
                         const Tensor<float>& image, const std::string& layer,
                         const TaskOptions& options, const SnapshotFn& snapshot) {
  if (options.precision == Precision::kF64) {
    return inversion_impl<double>(spec, weights, image, layer, options, snapshot);
  }
  return inversion_impl<float>(spec, weights, image, layer, options, snapshot);
}

TaskResult run_texture(const NetworkSpec& spec, const WeightSet& weights,
                       const Tensor<float>& texture,
                       const std::vector<std::string>& layers,
                       const TaskOptions& options, const SnapshotFn& snapshot) {
  if (options.precision == Precision::kF64) {
    return texture_impl<double>(spec, weights, texture, layers, options, snapshot);
  }
  return texture_impl<float>(spec, weights, texture, layers, options, snapshot);
}

TaskResult run_style(const NetworkSpec& spec, const WeightSet& weights,
                     const Tensor<float>& content, const Tensor<float>& style,
                     const std::string& content_layer,
                     const std::vector<std::string>& style_layers,
                     const StyleWeights& mix, const TaskOptions& options,
                     const SnapshotFn& snapshot) {
  if (options.precision == Precision::kF64) {
    return style_impl<double>(spec, weights, content, style, content_layer,
                              style_layers, mix, options, snapshot);
  }
  return style_impl<float>(spec, weights, content, style, content_layer, style_layers,
                           mix, options, snapshot);
}

double relative_error(const Tensor<double>& analytic, const Tensor<double>& numeric,
                      const std::vector<std::size_t>& coords) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i : coords) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(std::max(na, nn));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

GradcheckReport run_gradcheck(std::uint64_t seed, int depth, int size,
                              Precision precision, bool inject_fault) {
  require(depth >= 1 && depth <= 6, ErrorCode::kInvalidArgument,
          "gradcheck depth must be in [1, 6]");
  require(size >= 4 && size <= 32, ErrorCode::kInvalidArgument,
          "gradcheck size must be in [4, 32]");

  Rng rng(seed);
  NetworkSpec spec;
  const std::size_t pool_after = rng.next_u64() % static_cast<std::uint64_t>(depth);
  std::size_t channels = 3;
  for (int i = 0; i < depth; ++i) {
    const std::size_t out = 2 + rng.next_u64() % 5;
    const std::string id = std::to_string(i + 1);
    spec.layers.push_back(conv_layer("conv" + id, channels, out));
    spec.layers.push_back(relu_layer("relu" + id, out));
    channels = out;
    if (static_cast<std::size_t>(i) == pool_after) {
      spec.layers.push_back(pool_layer("pool1", channels));
    }
  }
  spec.validate();
  const WeightSet weights = init_random_weights(spec, 0.2, seed ^ 0xA5A5A5A5ULL);

  GradcheckReport report =
      precision == Precision::kF64
          ? gradcheck_impl<double>(spec, weights, seed, size, inject_fault)
          : gradcheck_impl<float>(spec, weights, seed, size, inject_fault);
  report.threshold = precision == Precision::kF64 ? 1e-6 : 1e-3;
  for (const auto& e : report.entries) report.worst = std::max(report.worst, e.rel_error);
  report.passed = report.worst < report.threshold;
  for (const auto& l : spec.layers) {
    if (!report.network.empty()) report.network += ' ';
    report.network += l.name;
    if (l.kind == LayerKind::kConv3x3) {
      report.network += "(" + std::to_string(l.in_channels) + "->" +
                        std::to_string(l.out_channels) + ")";
    }
  }
  return report;
}

}  // namespace randcnn
