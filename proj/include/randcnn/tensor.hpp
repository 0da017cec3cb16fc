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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "randcnn/error.hpp"

namespace randcnn {

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape& shape);

inline std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// Dense row-major array of rank 1..4. Feature maps are C x H x W, conv
// filters Cout x Cin x Kh x Kw. A default-constructed tensor is empty and
// only serves as a placeholder.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_volume(shape_), fill);
  }

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    require(data_.size() == shape_volume(shape_), ErrorCode::kShapeMismatch,
            "tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + shape_to_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  T& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  const T& at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  // Leading extent as rows, everything else flattened into columns. This is
  // the N x M feature-map matrix of a C x H x W activation.
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return rows() == 0 ? 0 : size() / rows(); }

  void reshape(Shape shape) {
    check_shape(shape);
    require(shape_volume(shape) == size(), ErrorCode::kShapeMismatch,
            "cannot reshape " + shape_to_string(shape_) + " to " +
                shape_to_string(shape));
    shape_ = std::move(shape);
  }

  Tensor reshaped(Shape shape) const {
    Tensor out = *this;
    out.reshape(std::move(shape));
    return out;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(const Shape& shape) {
    require(!shape.empty() && shape.size() <= 4, ErrorCode::kShapeMismatch,
            "tensor rank must be 1..4, got " + std::to_string(shape.size()));
    for (std::size_t e : shape) {
      require(e >= 1, ErrorCode::kShapeMismatch,
              "tensor extents must be >= 1, got " + shape_to_string(shape));
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

inline std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                        const char* what) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          std::string(what) + ": shape " + shape_to_string(a.shape()) +
              " vs " + shape_to_string(b.shape()));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double s) {
  Tensor<T> out = a;
  for (auto& v : out.values()) v = static_cast<T>(v * s);
  return out;
}

// In place: y += alpha * x.
template <typename T>
void axpy(double alpha, const Tensor<T>& x, Tensor<T>& y) {
  require_same_shape(x, y, "axpy");
  const T a = static_cast<T>(alpha);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Reductions accumulate in double regardless of T.
template <typename T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

template <typename T>
double squared_norm(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += static_cast<double>(v) * v;
  return acc;
}

template <typename T>
double sum(const Tensor<T>& a) {
  double acc = 0.0;
  for (T v : a.values()) acc += v;
  return acc;
}

template <typename T>
double max_abs(const Tensor<T>& a) {
  double m = 0.0;
  for (T v : a.values()) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

template <typename T>
double mean_abs(const Tensor<T>& a) {
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (T v : a.values()) acc += std::abs(static_cast<double>(v));
  return acc / static_cast<double>(a.size());
}

}  // namespace randcnn
