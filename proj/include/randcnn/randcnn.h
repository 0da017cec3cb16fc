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

/* C interface to the random-weight CNN synthesis engine.
 *
 * All objects are opaque handles released with their *_free function.
 * Every fallible call returns a randcnn_status; on failure a description is
 * available from randcnn_last_error() on the same thread. Images are
 * 3 x H x W planar float tensors in the 0-255 scale. */
#ifndef RANDCNN_RANDCNN_H_
#define RANDCNN_RANDCNN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RANDCNN_BUILDING_LIBRARY)
#define RANDCNN_API __declspec(dllexport)
#else
#define RANDCNN_API __declspec(dllimport)
#endif
#else
#define RANDCNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum randcnn_status {
  RANDCNN_OK = 0,
  RANDCNN_INVALID_ARGUMENT = 1,
  RANDCNN_SHAPE_MISMATCH = 2,
  RANDCNN_IO = 3,
  RANDCNN_UNSUPPORTED_FORMAT = 4,
  RANDCNN_NOT_A_WEIGHT_FILE = 5,
  RANDCNN_VERSION_MISMATCH = 6,
  RANDCNN_TRUNCATED_FILE = 7,
  RANDCNN_UNKNOWN_LAYER = 8,
  RANDCNN_UNNORMALIZABLE_LAYER = 9,
  RANDCNN_NON_FINITE = 10,
  RANDCNN_LINE_SEARCH_FAILED = 11,
  RANDCNN_THRESHOLD_BREACHED = 12,
  RANDCNN_INTERNAL = 99
} randcnn_status;

typedef enum randcnn_precision {
  RANDCNN_F32 = 0,
  RANDCNN_F64 = 1
} randcnn_precision;

typedef enum randcnn_scheme {
  RANDCNN_SCHEME_PURE_RANDOM = 0,
  RANDCNN_SCHEME_STACKED = 1,
  RANDCNN_SCHEME_IMPORTED = 2
} randcnn_scheme;

typedef struct randcnn_image randcnn_image;
typedef struct randcnn_weights randcnn_weights;
typedef struct randcnn_result randcnn_result;
typedef struct randcnn_stack_report randcnn_stack_report;

RANDCNN_API const char* randcnn_version(void);
RANDCNN_API const char* randcnn_last_error(void);
RANDCNN_API const char* randcnn_status_name(randcnn_status status);

/* Caps internal parallelism (BLAS threads, stacker candidates). */
RANDCNN_API void randcnn_set_threads(uint32_t threads);

/* ---- images ---- */

/* width = height = 0 keeps the native size. */
RANDCNN_API randcnn_status randcnn_image_load(const char* path, uint32_t width,
                                              uint32_t height, randcnn_image** out);
RANDCNN_API randcnn_status randcnn_image_from_data(const float* planar,
                                                   uint32_t width, uint32_t height,
                                                   randcnn_image** out);
RANDCNN_API randcnn_status randcnn_image_save(const randcnn_image* image,
                                              const char* path);
RANDCNN_API randcnn_status randcnn_image_resize(const randcnn_image* image,
                                                uint32_t width, uint32_t height,
                                                randcnn_image** out);
RANDCNN_API uint32_t randcnn_image_width(const randcnn_image* image);
RANDCNN_API uint32_t randcnn_image_height(const randcnn_image* image);
/* Borrowed pointer to 3 * height * width planar floats. */
RANDCNN_API const float* randcnn_image_data(const randcnn_image* image);
RANDCNN_API void randcnn_image_free(randcnn_image* image);

/* ---- weights ---- */

/* Layer names of the VGG-19 topology in forward order, including relu and
 * pool layers (and fc6..fc8 when include_fc is nonzero). */
RANDCNN_API size_t randcnn_vgg19_layer_count(int include_fc);
RANDCNN_API const char* randcnn_vgg19_layer_name(int include_fc, size_t index);

/* Pure-random VGG-19 weights up to truncate_at (NULL: all conv layers;
 * an fc layer name pulls in the fc block). */
RANDCNN_API randcnn_status randcnn_weights_random(const char* truncate_at,
                                                  double sigma, uint64_t seed,
                                                  randcnn_weights** out);
RANDCNN_API randcnn_status randcnn_weights_load(const char* path,
                                                randcnn_weights** out);
RANDCNN_API randcnn_status randcnn_weights_save(const randcnn_weights* weights,
                                                const char* path);
/* Checks the weights cover VGG-19 up to truncate_at with matching shapes. */
RANDCNN_API randcnn_status randcnn_weights_validate(const randcnn_weights* weights,
                                                    const char* truncate_at);
RANDCNN_API void randcnn_weights_provenance(const randcnn_weights* weights,
                                            uint64_t* seed, double* sigma,
                                            randcnn_scheme* scheme);
RANDCNN_API size_t randcnn_weights_layer_count(const randcnn_weights* weights);
RANDCNN_API const char* randcnn_weights_layer_name(const randcnn_weights* weights,
                                                   size_t index);
RANDCNN_API void randcnn_weights_free(randcnn_weights* weights);

/* ---- optimization tasks ---- */

typedef struct randcnn_task_options {
  uint32_t max_iters;
  uint32_t history;
  double tolerance;
  double wolfe_c1;
  double wolfe_c2;
  uint64_t init_seed;
  double noise_amplitude;
  double mean_rgb[3];
  randcnn_precision precision;
  uint32_t snapshot_every; /* 0 disables the snapshot callback */
} randcnn_task_options;

/* history 10, tolerance 1e-7, Wolfe (1e-4, 0.9), noise amplitude 10,
 * ImageNet mean, f32, 500 iterations, no snapshots. */
RANDCNN_API void randcnn_task_options_default(randcnn_task_options* options);

/* Checks that `image` can feed VGG-19 up to `layer` without drawing any
 * weights; fc layers need a 256x256 image. */
RANDCNN_API randcnn_status randcnn_check_input(const char* layer,
                                               const randcnn_image* image);

/* The image is only valid for the duration of the call. */
typedef void (*randcnn_snapshot_fn)(uint32_t iteration, const randcnn_image* image,
                                    void* user);

RANDCNN_API randcnn_status randcnn_invert(const randcnn_weights* weights,
                                          const randcnn_image* source,
                                          const char* layer,
                                          const randcnn_task_options* options,
                                          randcnn_snapshot_fn snapshot, void* user,
                                          randcnn_result** out);

RANDCNN_API randcnn_status randcnn_texture(const randcnn_weights* weights,
                                           const randcnn_image* texture,
                                           const char* const* layers,
                                           size_t layer_count,
                                           const randcnn_task_options* options,
                                           randcnn_snapshot_fn snapshot, void* user,
                                           randcnn_result** out);

RANDCNN_API randcnn_status randcnn_style(
    const randcnn_weights* weights, const randcnn_image* content,
    const randcnn_image* style, const char* content_layer,
    const char* const* style_layers, size_t style_layer_count, double alpha,
    double beta, double gamma, const randcnn_task_options* options,
    randcnn_snapshot_fn snapshot, void* user, randcnn_result** out);

typedef struct randcnn_trace_row {
  int32_t iteration;
  double loss;
  double grad_max;
  double step;
  int32_t evals;
  double ms;
} randcnn_trace_row;

/* Borrowed; lives as long as the result. */
RANDCNN_API const randcnn_image* randcnn_result_image(const randcnn_result* result);
RANDCNN_API size_t randcnn_result_trace_length(const randcnn_result* result);
RANDCNN_API randcnn_trace_row randcnn_result_trace_row(const randcnn_result* result,
                                                       size_t index);
RANDCNN_API const char* randcnn_result_termination(const randcnn_result* result);
RANDCNN_API randcnn_status randcnn_result_write_trace(const randcnn_result* result,
                                                      const char* csv_path);
/* omega/mu values computed by the normalization probes. */
RANDCNN_API size_t randcnn_result_factor_count(const randcnn_result* result);
RANDCNN_API const char* randcnn_result_factor_layer(const randcnn_result* result,
                                                    size_t index);
RANDCNN_API const char* randcnn_result_factor_kind(const randcnn_result* result,
                                                   size_t index);
RANDCNN_API double randcnn_result_factor_value(const randcnn_result* result,
                                               size_t index);
/* Unscaled content, texture and TV terms at the final iterate. */
RANDCNN_API void randcnn_result_terms(const randcnn_result* result, double* content,
                                      double* texture, double* tv);
RANDCNN_API void randcnn_result_free(randcnn_result* result);

/* ---- stacked weights ---- */

/* Greedy stacked construction over the conv layers of VGG-19 up to
 * truncate_at. The reference is scored at its own size; the options give
 * the per-candidate inversion budget (precision is ignored: f32). */
RANDCNN_API randcnn_status randcnn_stack(const randcnn_image* reference,
                                         const char* reference_id,
                                         const char* truncate_at, uint32_t k,
                                         double sigma, uint64_t seed,
                                         const randcnn_task_options* options,
                                         randcnn_weights** out_weights,
                                         randcnn_stack_report** out_report);
/* JSON text, owned by the report. */
RANDCNN_API const char* randcnn_stack_report_json(const randcnn_stack_report* report);
RANDCNN_API void randcnn_stack_report_free(randcnn_stack_report* report);

/* Final unweighted inversion loss at `layer` for each (scheme, seed) pair.
 * Each entry of `weights` is one scheme evaluated with white-noise seed =
 * run seed; a NULL entry is the pure-random scheme whose weights are drawn
 * with the run seed and `sigma`. out_losses has weight_count * seed_count
 * entries, scheme-major. Needs at least two seeds. */
RANDCNN_API randcnn_status randcnn_compare_variance(
    const randcnn_image* image, const char* layer,
    const randcnn_weights* const* weights, size_t weight_count,
    const uint64_t* seeds, size_t seed_count, double sigma,
    const randcnn_task_options* options, double* out_losses);

/* ---- gradient self-check ---- */

typedef struct randcnn_gradcheck_report {
  double content;
  double texture;
  double tv;
  double combined;
  double worst;
  double threshold;
  int passed;
} randcnn_gradcheck_report;

/* Returns RANDCNN_THRESHOLD_BREACHED (with the report filled in) when the
 * worst relative error is not below the precision's threshold. */
RANDCNN_API randcnn_status randcnn_gradcheck(uint64_t seed, uint32_t depth,
                                             uint32_t size,
                                             randcnn_precision precision,
                                             int inject_fault,
                                             randcnn_gradcheck_report* out);

#ifdef __cplusplus
}
#endif

#endif /* RANDCNN_RANDCNN_H_ */
