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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "randcnn/objectives.hpp"
#include "randcnn/tensor.hpp"

namespace randcnn {

struct LineSearchParams {
  double sufficient_decrease = 1e-4;  // c1
  double curvature = 0.9;             // c2
  int max_evals = 25;
};

struct OptimConfig {
  int max_iters = 500;
  int history = 10;
  // Relative loss change below which a step counts as stalled; five stalled
  // steps in a row stop the run.
  double tolerance = 1e-7;
  LineSearchParams line_search;
  std::uint64_t seed = 0;  // white-noise initialization

  void validate() const;
};

struct TraceRow {
  int iteration = 0;  // accepted steps so far; row 0 is the starting point
  double loss = 0.0;
  double grad_max = 0.0;
  double step = 0.0;
  int evals = 0;  // cumulative objective evaluations
  double ms = 0.0;
};

enum class Termination {
  kMaxIters,
  kConverged,
  kStationary,
  kLineSearchFailed,
};

const char* termination_name(Termination t) noexcept;

struct OptimTrace {
  std::vector<TraceRow> rows;
  Termination termination = Termination::kMaxIters;

  // iteration,loss,grad_max,step,evals,ms
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

  // Loss after `iteration` accepted steps, if the run got that far.
  std::optional<double> loss_at(int iteration) const;
};

template <typename T>
using ObjectiveFn = std::function<LossAndGrad<T>(const Tensor<T>&)>;

// Called for the starting point and after every accepted step.
template <typename T>
using IterationCallback = std::function<void(const TraceRow&, const Tensor<T>&)>;

template <typename T>
struct OptimResult {
  Tensor<T> x;
  double loss = 0.0;
  OptimTrace trace;
};

// i.i.d. uniform values in [-amplitude, amplitude].
template <typename T>
Tensor<T> white_noise_init(const Shape& shape, std::uint64_t seed, double amplitude);

// L-BFGS (two-loop recursion) with a strong-Wolfe line search. Throws
// kNonFinite if the objective produces NaN/Inf. A failed line search falls
// back to one steepest-descent attempt; a second failure ends the run with
// Termination::kLineSearchFailed and the best iterate so far.
template <typename T>
OptimResult<T> lbfgs_minimize(const ObjectiveFn<T>& objective, Tensor<T> x_init,
                              const OptimConfig& cfg,
                              const IterationCallback<T>& on_iteration = {});

// Central differences, over all coordinates or just `coords`. Entries not
// sampled are left at zero.
template <typename T>
Tensor<T> finite_diff_grad(const std::function<double(const Tensor<T>&)>& loss,
                           const Tensor<T>& x, double step,
                           const std::optional<std::vector<std::size_t>>& coords =
                               std::nullopt);

}  // namespace randcnn
