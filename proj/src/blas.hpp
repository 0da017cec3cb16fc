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

#include <cstddef>

// Row-major GEMM / SYRK wrappers over CBLAS, overloaded on precision.
namespace randcnn::blas {

// C = alpha * op(A) * op(B) + beta * C, with op(A) m x k and op(B) k x n.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, float alpha, const float* a, const float* b,
          float beta, float* c);
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, double alpha, const double* a, const double* b,
          double beta, double* c);

// C = A * A^T for an n x k A, with both triangles filled.
void gram(std::size_t n, std::size_t k, const float* a, float* c);
void gram(std::size_t n, std::size_t k, const double* a, double* c);

void set_threads(int threads);

}  // namespace randcnn::blas
