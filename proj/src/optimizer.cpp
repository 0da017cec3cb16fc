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

#include "randcnn/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>

#include "randcnn/rng.hpp"

namespace randcnn {
namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
struct Probe {
  double step = 0.0;
  double loss = 0.0;
  double slope = 0.0;  // directional derivative along the search direction
  Tensor<T> x;
  Tensor<T> grad;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

template <typename T>
class StrongWolfeSearch {
 public:
  StrongWolfeSearch(const ObjectiveFn<T>& objective, const Tensor<T>& x,
                    const Tensor<T>& direction, double loss0, double slope0,
                    const LineSearchParams& params, int& evals, int iteration)
      : objective_(objective),
        x_(x),
        dir_(direction),
        loss0_(loss0),
        slope0_(slope0),
        params_(params),
        evals_(evals),
        iteration_(iteration) {}

  // Returns a point meeting the strong Wolfe conditions, or failing that
  // the lowest point with sufficient decrease, or nothing.
  std::optional<Probe<T>> run(double initial_step) {
    Probe<T> prev{0.0, loss0_, slope0_, {}, {}};
    double step = initial_step;
    for (int i = 0; i < params_.max_evals; ++i) {
      Probe<T> cur = eval(step);
      if (!armijo(cur) || (i > 0 && cur.loss >= prev.loss)) {
        return zoom(std::move(prev), std::move(cur));
      }
      if (std::abs(cur.slope) <= -params_.curvature * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(std::move(cur), std::move(prev));
      double next = cubic_min(prev.step, prev.loss, prev.slope, cur.step,
                              cur.loss, cur.slope);
      const double lo = cur.step + 1.1 * (cur.step - prev.step);
      const double hi = cur.step * 10.0;
      if (!std::isfinite(next) || next < lo || next > hi) {
        next = std::min(hi, std::max(lo, 4.0 * cur.step));
      }
      prev = std::move(cur);
      step = next;
    }
    return prev.step > 0.0 ? std::optional<Probe<T>>(std::move(prev)) : std::nullopt;
  }

 private:
  bool armijo(const Probe<T>& p) const {
    return p.loss <= loss0_ + params_.sufficient_decrease * p.step * slope0_;
  }

  Probe<T> eval(double step) {
    Probe<T> p;
    p.step = step;
    p.x = x_;
    axpy(step, dir_, p.x);
    auto lg = objective_(p.x);
    ++evals_;
    if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
      fail(ErrorCode::kNonFinite,
           "objective returned a non-finite value during the line search of "
           "iteration " + std::to_string(iteration_) + " (step " +
               std::to_string(step) + ")");
    }
    p.loss = lg.loss;
    p.grad = std::move(lg.grad);
    p.slope = dot(p.grad, dir_);
    return p;
  }

  // `lo` satisfies sufficient decrease and has the lowest loss seen; the
  // interval between lo and hi contains a strong-Wolfe point.
  std::optional<Probe<T>> zoom(Probe<T> lo, Probe<T> hi) {
    for (int used = evals_; evals_ - used < params_.max_evals;) {
      const double left = std::min(lo.step, hi.step);
      const double right = std::max(lo.step, hi.step);
      const double width = right - left;
      if (width <= 1e-14 * std::max(1.0, right)) break;
      double step = cubic_min(lo.step, lo.loss, lo.slope, hi.step, hi.loss, hi.slope);
      if (!std::isfinite(step) || step < left + 0.1 * width ||
          step > right - 0.1 * width) {
        step = 0.5 * (left + right);
      }
      Probe<T> cur = eval(step);
      if (!armijo(cur) || cur.loss >= lo.loss) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -params_.curvature * slope0_) return cur;
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = std::move(lo);
      lo = std::move(cur);
    }
    if (lo.step > 0.0 && lo.loss < loss0_) return lo;
    return std::nullopt;
  }

  const ObjectiveFn<T>& objective_;
  const Tensor<T>& x_;
  const Tensor<T>& dir_;
  double loss0_;
  double slope0_;
  LineSearchParams params_;
  int& evals_;
  int iteration_;
};

template <typename T>
struct Correction {
  Tensor<T> s;
  Tensor<T> y;
  double rho;
};

template <typename T>
Tensor<T> two_loop_direction(const Tensor<T>& grad,
                             const std::deque<Correction<T>>& history) {
  Tensor<T> q = grad;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * dot(history[i].s, q);
    axpy(-alpha[i], history[i].y, q);
  }
  const auto& newest = history.back();
  const double gamma = dot(newest.s, newest.y) / squared_norm(newest.y);
  Tensor<T> r = scale(q, gamma);
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * dot(history[i].y, r);
    axpy(alpha[i] - beta, history[i].s, r);
  }
  return scale(r, -1.0);
}

template <typename T>
void check_finite(const LossAndGrad<T>& lg, int iteration) {
  if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
    fail(ErrorCode::kNonFinite, "objective returned a non-finite value at iteration " +
                                    std::to_string(iteration));
  }
}

}  // namespace

const char* termination_name(Termination t) noexcept {
  switch (t) {
    case Termination::kMaxIters: return "max_iters";
    case Termination::kConverged: return "converged";
    case Termination::kStationary: return "stationary";
    case Termination::kLineSearchFailed: return "line_search_failed";
  }
  return "?";
}

void OptimConfig::validate() const {
  require(max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  require(history >= 1, ErrorCode::kInvalidArgument, "history must be >= 1");
  require(tolerance >= 0.0, ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  require(line_search.sufficient_decrease > 0.0 &&
              line_search.sufficient_decrease < line_search.curvature &&
              line_search.curvature < 1.0,
          ErrorCode::kInvalidArgument,
          "line search constants must satisfy 0 < c1 < c2 < 1");
  require(line_search.max_evals >= 1, ErrorCode::kInvalidArgument,
          "line search needs at least one evaluation");
}

std::string OptimTrace::to_csv() const {
  std::string out = "iteration,loss,grad_max,step,evals,ms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d,%.3f\n", r.iteration,
                  r.loss, r.grad_max, r.step, r.evals, r.ms);
    out += buf;
  }
  return out;
}

void OptimTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo,
          "cannot write trace CSV " + path.string());
  out << to_csv();
}

std::optional<double> OptimTrace::loss_at(int iteration) const {
  for (const auto& r : rows) {
    if (r.iteration == iteration) return r.loss;
  }
  return std::nullopt;
}

template <typename T>
Tensor<T> white_noise_init(const Shape& shape, std::uint64_t seed, double amplitude) {
  require(amplitude > 0.0 && std::isfinite(amplitude), ErrorCode::kInvalidArgument,
          "noise amplitude must be positive");
  Tensor<T> out(shape);
  Rng rng(seed);
  for (auto& v : out.values()) v = static_cast<T>(rng.uniform(-amplitude, amplitude));
  return out;
}

template <typename T>
OptimResult<T> lbfgs_minimize(const ObjectiveFn<T>& objective, Tensor<T> x_init,
                              const OptimConfig& cfg,
                              const IterationCallback<T>& on_iteration) {
  cfg.validate();
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  OptimResult<T> result;
  result.x = std::move(x_init);
  auto lg = objective(result.x);
  check_finite(lg, 0);
  int evals = 1;
  double loss = lg.loss;
  Tensor<T> grad = std::move(lg.grad);
  require_same_shape(grad, result.x, "objective gradient");
  result.trace.rows.push_back({0, loss, max_abs(grad), 0.0, evals, elapsed_ms()});
  if (on_iteration) on_iteration(result.trace.rows.back(), result.x);

  auto finish = [&](Termination why) {
    result.loss = loss;
    result.trace.termination = why;
    return std::move(result);
  };
  if (max_abs(grad) == 0.0) return finish(Termination::kStationary);

  std::deque<Correction<T>> history;
  int stalled = 0;
  int iteration = 0;
  while (iteration < cfg.max_iters) {
    Tensor<T> dir = history.empty() ? scale(grad, -1.0)
                                    : two_loop_direction(grad, history);
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {
      history.clear();
      dir = scale(grad, -1.0);
      slope = dot(grad, dir);
    }
    const bool steepest = history.empty();
    const double initial_step =
        steepest ? std::min(1.0, 1.0 / std::sqrt(squared_norm(grad))) : 1.0;

    StrongWolfeSearch<T> search(objective, result.x, dir, loss, slope,
                                cfg.line_search, evals, iteration + 1);
    auto found = search.run(initial_step);
    if (!found) {
      if (steepest) return finish(Termination::kLineSearchFailed);
      history.clear();
      continue;
    }

    Tensor<T> s = sub(found->x, result.x);
    Tensor<T> y = sub(found->grad, grad);
    const double ys = dot(y, s);
    const double yy = squared_norm(y);
    if (ys > 1e-10 * yy && yy > 0.0) {
      if (static_cast<int>(history.size()) == cfg.history) history.pop_front();
      history.push_back({std::move(s), std::move(y), 1.0 / ys});
    }

    const double prev_loss = loss;
    loss = found->loss;
    result.x = std::move(found->x);
    grad = std::move(found->grad);
    ++iteration;

    const TraceRow row{iteration, loss, max_abs(grad), found->step, evals, elapsed_ms()};
    result.trace.rows.push_back(row);
    if (on_iteration) on_iteration(row, result.x);

    if (row.grad_max == 0.0) return finish(Termination::kStationary);
    if (loss == 0.0) return finish(Termination::kConverged);
    const double denom = std::max({std::abs(prev_loss), std::abs(loss),
                                   std::numeric_limits<double>::min()});
    stalled = (prev_loss - loss) / denom < cfg.tolerance ? stalled + 1 : 0;
    if (stalled >= 5) return finish(Termination::kConverged);
  }
  return finish(Termination::kMaxIters);
}

template <typename T>
Tensor<T> finite_diff_grad(const std::function<double(const Tensor<T>&)>& loss,
                           const Tensor<T>& x, double step,
                           const std::optional<std::vector<std::size_t>>& coords) {
  require(step > 0.0, ErrorCode::kInvalidArgument, "finite-difference step must be > 0");
  Tensor<T> out(x.shape());
  Tensor<T> probe = x;
  auto one = [&](std::size_t i) {
    require(i < x.size(), ErrorCode::kInvalidArgument, "coordinate out of range");
    const T orig = x[i];
    probe[i] = static_cast<T>(orig + step);
    const double hi = static_cast<double>(probe[i]);
    const double f_hi = loss(probe);
    probe[i] = static_cast<T>(orig - step);
    const double lo = static_cast<double>(probe[i]);
    const double f_lo = loss(probe);
    probe[i] = orig;
    out[i] = static_cast<T>((f_hi - f_lo) / (hi - lo));
  };
  if (coords) {
    for (std::size_t i : *coords) one(i);
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) one(i);
  }
  return out;
}

#define RANDCNN_INSTANTIATE_OPTIMIZER(T)                                          \
  template Tensor<T> white_noise_init<T>(const Shape&, std::uint64_t, double);    \
  template OptimResult<T> lbfgs_minimize(const ObjectiveFn<T>&, Tensor<T>,        \
                                         const OptimConfig&,                      \
                                         const IterationCallback<T>&);            \
  template Tensor<T> finite_diff_grad(                                            \
      const std::function<double(const Tensor<T>&)>&, const Tensor<T>&, double,   \
      const std::optional<std::vector<std::size_t>>&);

RANDCNN_INSTANTIATE_OPTIMIZER(float)
RANDCNN_INSTANTIATE_OPTIMIZER(double)

}  // namespace randcnn
