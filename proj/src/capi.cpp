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

#include "randcnn/randcnn.h"

#include <new>
#include <string>
#include <vector>

#include "randcnn/image.hpp"
#include "randcnn/network_spec.hpp"
#include "randcnn/parallel.hpp"
#include "randcnn/stacker.hpp"
#include "randcnn/tasks.hpp"
#include "randcnn/weights.hpp"

struct randcnn_image {
  randcnn::Tensor<float> pixels;
};

struct randcnn_weights {
  randcnn::WeightSet set;
};

struct randcnn_result {
  randcnn::TaskResult task;
  randcnn_image image;
};

struct randcnn_stack_report {
  randcnn::StackingReport report;
  std::string json;
};

namespace {

using randcnn::ErrorCode;

thread_local std::string g_last_error;

template <typename F>
randcnn_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return RANDCNN_OK;
  } catch (const randcnn::Error& e) {
    g_last_error = e.what();
    return static_cast<randcnn_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RANDCNN_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RANDCNN_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  randcnn::require(p != nullptr, ErrorCode::kInvalidArgument,
                   std::string(what) + " must not be NULL");
}

bool is_fc_name(const std::string& name) {
  return name.starts_with("fc") || name == "relu6" || name == "relu7";
}

// Full topology covering the requested layers.
randcnn::NetworkSpec spec_for(const std::vector<std::string>& layers) {
  bool fc = false;
  for (const auto& l : layers) fc = fc || is_fc_name(l);
  return randcnn::build_vgg19_spec(std::nullopt, fc);
}

randcnn::TaskOptions to_options(const randcnn_task_options* o) {
  randcnn_task_options defaults;
  randcnn_task_options_default(&defaults);
  if (!o) o = &defaults;
  randcnn::TaskOptions out;
  out.budget.optim.max_iters = static_cast<int>(o->max_iters);
  out.budget.optim.history = static_cast<int>(o->history);
  out.budget.optim.tolerance = o->tolerance;
  out.budget.optim.line_search.sufficient_decrease = o->wolfe_c1;
  out.budget.optim.line_search.curvature = o->wolfe_c2;
  out.budget.optim.seed = o->init_seed;
  out.budget.noise_amplitude = o->noise_amplitude;
  out.mean_rgb = {o->mean_rgb[0], o->mean_rgb[1], o->mean_rgb[2]};
  out.precision = o->precision == RANDCNN_F64 ? randcnn::Precision::kF64
                                              : randcnn::Precision::kF32;
  out.snapshot_every = static_cast<int>(o->snapshot_every);
  out.budget.optim.validate();
  return out;
}

randcnn::SnapshotFn to_snapshot(randcnn_snapshot_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](int iteration, const randcnn::Tensor<float>& image) {
    const randcnn_image view{image};
    fn(static_cast<uint32_t>(iteration), &view, user);
  };
}

std::vector<std::string> to_names(const char* const* names, size_t count) {
  randcnn::require(count > 0, ErrorCode::kInvalidArgument, "no layers given");
  need(names, "layer list");
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) {
    need(names[i], "layer name");
    out.emplace_back(names[i]);
  }
  return out;
}

randcnn_result* wrap(randcnn::TaskResult task) {
  auto* r = new randcnn_result{std::move(task), {}};
  r->image.pixels = r->task.image;
  return r;
}

const std::vector<std::string>& vgg19_names(int include_fc) {
  static const auto make = [](bool fc) {
    std::vector<std::string> out;
    for (const auto& l : randcnn::build_vgg19_spec(std::nullopt, fc).layers) {
      out.push_back(l.name);
    }
    return out;
  };
  static const std::vector<std::string> conv = make(false);
  static const std::vector<std::string> full = make(true);
  return include_fc ? full : conv;
}

}  // namespace

extern "C" {

const char* randcnn_version(void) { return "0.1.0"; }

const char* randcnn_last_error(void) { return g_last_error.c_str(); }

const char* randcnn_status_name(randcnn_status status) {
  return randcnn::error_code_name(static_cast<ErrorCode>(status));
}

void randcnn_set_threads(uint32_t threads) { randcnn::set_thread_limit(threads); }

randcnn_status randcnn_image_load(const char* path, uint32_t width, uint32_t height,
                                  randcnn_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::optional<randcnn::ImageSize> size;
    if (width != 0 || height != 0) size = randcnn::ImageSize{width, height};
    *out = new randcnn_image{randcnn::load_image(path, size)};
  });
}

randcnn_status randcnn_image_from_data(const float* planar, uint32_t width,
                                       uint32_t height, randcnn_image** out) {
  return guarded([&] {
    need(planar, "data");
    need(out, "out");
    const std::size_t n = 3ULL * width * height;
    randcnn::require(n > 0, ErrorCode::kInvalidArgument, "image has a zero dimension");
    *out = new randcnn_image{randcnn::Tensor<float>(
        {3, height, width}, std::vector<float>(planar, planar + n))};
  });
}

randcnn_status randcnn_image_save(const randcnn_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    randcnn::save_image(image->pixels, path);
  });
}

randcnn_status randcnn_image_resize(const randcnn_image* image, uint32_t width,
                                    uint32_t height, randcnn_image** out) {
  return guarded([&] {
    need(image, "image");
    need(out, "out");
    *out = new randcnn_image{randcnn::resize_bilinear(image->pixels, {width, height})};
  });
}

uint32_t randcnn_image_width(const randcnn_image* image) {
  return image ? static_cast<uint32_t>(image->pixels.extent(2)) : 0;
}

uint32_t randcnn_image_height(const randcnn_image* image) {
  return image ? static_cast<uint32_t>(image->pixels.extent(1)) : 0;
}

const float* randcnn_image_data(const randcnn_image* image) {
  return image ? image->pixels.data() : nullptr;
}

void randcnn_image_free(randcnn_image* image) { delete image; }

size_t randcnn_vgg19_layer_count(int include_fc) {
  return vgg19_names(include_fc).size();
}

const char* randcnn_vgg19_layer_name(int include_fc, size_t index) {
  const auto& names = vgg19_names(include_fc);
  return index < names.size() ? names[index].c_str() : nullptr;
}

randcnn_status randcnn_weights_random(const char* truncate_at, double sigma,
                                      uint64_t seed, randcnn_weights** out) {
  return guarded([&] {
    need(out, "out");
    std::optional<std::string> cut;
    if (truncate_at) cut = truncate_at;
    const auto spec = randcnn::build_vgg19_spec(cut, false);
    *out = new randcnn_weights{randcnn::init_random_weights(spec, sigma, seed)};
  });
}

randcnn_status randcnn_weights_load(const char* path, randcnn_weights** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new randcnn_weights{randcnn::load_weights(path)};
  });
}

randcnn_status randcnn_weights_save(const randcnn_weights* weights, const char* path) {
  return guarded([&] {
    need(weights, "weights");
    need(path, "path");
    randcnn::save_weights(weights->set, path);
  });
}

randcnn_status randcnn_weights_validate(const randcnn_weights* weights,
                                        const char* truncate_at) {
  return guarded([&] {
    need(weights, "weights");
    std::optional<std::string> cut;
    if (truncate_at) cut = truncate_at;
    randcnn::validate_weights(randcnn::build_vgg19_spec(cut, false), weights->set);
  });
}

void randcnn_weights_provenance(const randcnn_weights* weights, uint64_t* seed,
                                double* sigma, randcnn_scheme* scheme) {
  if (!weights) return;
  if (seed) *seed = weights->set.provenance.seed;
  if (sigma) *sigma = weights->set.provenance.sigma;
  if (scheme) *scheme = static_cast<randcnn_scheme>(weights->set.provenance.scheme);
}

size_t randcnn_weights_layer_count(const randcnn_weights* weights) {
  return weights ? weights->set.layers.size() : 0;
}

const char* randcnn_weights_layer_name(const randcnn_weights* weights, size_t index) {
  if (!weights || index >= weights->set.layers.size()) return nullptr;
  return weights->set.layers[index].name.c_str();
}

void randcnn_weights_free(randcnn_weights* weights) { delete weights; }

void randcnn_task_options_default(randcnn_task_options* options) {
  if (!options) return;
  const randcnn::OptimConfig optim;
  options->max_iters = static_cast<uint32_t>(optim.max_iters);
  options->history = static_cast<uint32_t>(optim.history);
  options->tolerance = optim.tolerance;
  options->wolfe_c1 = optim.line_search.sufficient_decrease;
  options->wolfe_c2 = optim.line_search.curvature;
  options->init_seed = 0;
  options->noise_amplitude = 10.0;
  for (int c = 0; c < 3; ++c) options->mean_rgb[c] = randcnn::kDefaultMeanRgb[c];
  options->precision = RANDCNN_F32;
  options->snapshot_every = 0;
}

randcnn_status randcnn_check_input(const char* layer, const randcnn_image* image) {
  return guarded([&] {
    need(layer, "layer");
    need(image, "image");
    randcnn::check_task_input(spec_for({layer}), layer, image->pixels);
  });
}

randcnn_status randcnn_invert(const randcnn_weights* weights,
                              const randcnn_image* source, const char* layer,
                              const randcnn_task_options* options,
                              randcnn_snapshot_fn snapshot, void* user,
                              randcnn_result** out) {
  return guarded([&] {
    need(weights, "weights");
    need(source, "source");
    need(layer, "layer");
    need(out, "out");
    const auto spec = spec_for({layer});
    *out = wrap(randcnn::run_inversion(spec, weights->set, source->pixels, layer,
                                       to_options(options), to_snapshot(snapshot, user)));
  });
}

randcnn_status randcnn_texture(const randcnn_weights* weights,
                               const randcnn_image* texture, const char* const* layers,
                               size_t layer_count, const randcnn_task_options* options,
                               randcnn_snapshot_fn snapshot, void* user,
                               randcnn_result** out) {
  return guarded([&] {
    need(weights, "weights");
    need(texture, "texture");
    need(out, "out");
    const auto names = to_names(layers, layer_count);
    *out = wrap(randcnn::run_texture(spec_for(names), weights->set, texture->pixels,
                                     names, to_options(options),
                                     to_snapshot(snapshot, user)));
  });
}

randcnn_status randcnn_style(const randcnn_weights* weights,
                             const randcnn_image* content, const randcnn_image* style,
                             const char* content_layer, const char* const* style_layers,
                             size_t style_layer_count, double alpha, double beta,
                             double gamma, const randcnn_task_options* options,
                             randcnn_snapshot_fn snapshot, void* user,
                             randcnn_result** out) {
  return guarded([&] {
    need(weights, "weights");
    need(content, "content");
    need(style, "style");
    need(content_layer, "content layer");
    need(out, "out");
    const auto names = to_names(style_layers, style_layer_count);
    auto all = names;
    all.emplace_back(content_layer);
    *out = wrap(randcnn::run_style(spec_for(all), weights->set, content->pixels,
                                   style->pixels, content_layer, names,
                                   {alpha, beta, gamma}, to_options(options),
                                   to_snapshot(snapshot, user)));
  });
}

const randcnn_image* randcnn_result_image(const randcnn_result* result) {
  return result ? &result->image : nullptr;
}

size_t randcnn_result_trace_length(const randcnn_result* result) {
  return result ? result->task.trace.rows.size() : 0;
}

randcnn_trace_row randcnn_result_trace_row(const randcnn_result* result, size_t index) {
  randcnn_trace_row row{};
  if (!result || index >= result->task.trace.rows.size()) return row;
  const auto& r = result->task.trace.rows[index];
  row.iteration = r.iteration;
  row.loss = r.loss;
  row.grad_max = r.grad_max;
  row.step = r.step;
  row.evals = r.evals;
  row.ms = r.ms;
  return row;
}

const char* randcnn_result_termination(const randcnn_result* result) {
  return result ? randcnn::termination_name(result->task.trace.termination) : "";
}

randcnn_status randcnn_result_write_trace(const randcnn_result* result,
                                          const char* csv_path) {
  return guarded([&] {
    need(result, "result");
    need(csv_path, "path");
    result->task.trace.write_csv(csv_path);
  });
}

size_t randcnn_result_factor_count(const randcnn_result* result) {
  return result ? result->task.factors.size() : 0;
}

const char* randcnn_result_factor_layer(const randcnn_result* result, size_t index) {
  if (!result || index >= result->task.factors.size()) return nullptr;
  return result->task.factors[index].layer.c_str();
}

const char* randcnn_result_factor_kind(const randcnn_result* result, size_t index) {
  if (!result || index >= result->task.factors.size()) return nullptr;
  return result->task.factors[index].kind.c_str();
}

double randcnn_result_factor_value(const randcnn_result* result, size_t index) {
  if (!result || index >= result->task.factors.size()) return 0.0;
  return result->task.factors[index].value;
}

void randcnn_result_terms(const randcnn_result* result, double* content,
                          double* texture, double* tv) {
  if (!result) return;
  if (content) *content = result->task.final_terms.content;
  if (texture) *texture = result->task.final_terms.texture;
  if (tv) *tv = result->task.final_terms.tv;
}

void randcnn_result_free(randcnn_result* result) { delete result; }

randcnn_status randcnn_stack(const randcnn_image* reference, const char* reference_id,
                             const char* truncate_at, uint32_t k, double sigma,
                             uint64_t seed, const randcnn_task_options* options,
                             randcnn_weights** out_weights,
                             randcnn_stack_report** out_report) {
  return guarded([&] {
    need(reference, "reference");
    need(out_weights, "out_weights");
    std::optional<std::string> cut;
    if (truncate_at) cut = truncate_at;
    randcnn::require(!cut || !is_fc_name(*cut), ErrorCode::kInvalidArgument,
                     "stacking covers convolutional layers only");
    const auto spec = randcnn::build_vgg19_spec(cut, false);
    const auto opts = to_options(options);
    const auto meta = randcnn::ImageMeta::for_image(reference->pixels, opts.mean_rgb);
    auto built = randcnn::build_stacked(spec, randcnn::preprocess(reference->pixels, meta),
                                        k, opts.budget, sigma, seed,
                                        reference_id ? reference_id : "reference");
    *out_weights = new randcnn_weights{std::move(built.weights)};
    if (out_report) {
      auto* report = new randcnn_stack_report{std::move(built.report), {}};
      report->json = report->report.to_json();
      *out_report = report;
    }
  });
}

const char* randcnn_stack_report_json(const randcnn_stack_report* report) {
  return report ? report->json.c_str() : nullptr;
}

void randcnn_stack_report_free(randcnn_stack_report* report) { delete report; }

randcnn_status randcnn_compare_variance(const randcnn_image* image, const char* layer,
                                        const randcnn_weights* const* weights,
                                        size_t weight_count, const uint64_t* seeds,
                                        size_t seed_count, double sigma,
                                        const randcnn_task_options* options,
                                        double* out_losses) {
  return guarded([&] {
    need(image, "image");
    need(layer, "layer");
    need(weights, "weights");
    need(seeds, "seeds");
    need(out_losses, "out_losses");
    const auto spec = randcnn::build_vgg19_spec(std::string(layer), false);
    const auto opts = to_options(options);
    std::vector<randcnn::WeightSchemeSource> schemes;
    for (size_t i = 0; i < weight_count; ++i) {
      if (weights[i]) {
        const randcnn::WeightSet* fixed = &weights[i]->set;
        schemes.push_back({randcnn::weight_scheme_name(fixed->provenance.scheme),
                           [fixed](std::uint64_t) { return *fixed; }});
      } else {
        schemes.push_back({"pure-random", [&spec, sigma](std::uint64_t s) {
                             return randcnn::init_random_weights(spec, sigma, s);
                           }});
      }
    }
    const auto meta = randcnn::ImageMeta::for_image(image->pixels, opts.mean_rgb);
    const auto table = randcnn::compare_variance(
        spec, randcnn::preprocess(image->pixels, meta), schemes,
        std::vector<std::uint64_t>(seeds, seeds + seed_count), layer, opts.budget);
    for (size_t i = 0; i < table.rows.size(); ++i) out_losses[i] = table.rows[i].loss;
  });
}

randcnn_status randcnn_gradcheck(uint64_t seed, uint32_t depth, uint32_t size,
                                 randcnn_precision precision, int inject_fault,
                                 randcnn_gradcheck_report* out) {
  randcnn::GradcheckReport report;
  const randcnn_status status = guarded([&] {
    need(out, "out");
    report = randcnn::run_gradcheck(
        seed, static_cast<int>(depth), static_cast<int>(size),
        precision == RANDCNN_F64 ? randcnn::Precision::kF64 : randcnn::Precision::kF32,
        inject_fault != 0);
  });
  if (status != RANDCNN_OK) return status;
  auto entry = [&](const char* name) {
    for (const auto& e : report.entries) {
      if (e.objective == name) return e.rel_error;
    }
    return 0.0;
  };
  out->content = entry("content");
  out->texture = entry("texture");
  out->tv = entry("tv");
  out->combined = entry("combined");
  out->worst = report.worst;
  out->threshold = report.threshold;
  out->passed = report.passed ? 1 : 0;
  if (!report.passed) {
    g_last_error = "gradient check failed: worst relative error " +
                   std::to_string(report.worst) + " >= " +
                   std::to_string(report.threshold) + " on " + report.network;
    return RANDCNN_THRESHOLD_BREACHED;
  }
  return RANDCNN_OK;
}

}  // extern "C"
