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

#include "randcnn/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "blas.hpp"

namespace randcnn {
namespace {

std::size_t from_environment() {
  if (const char* env = std::getenv("RANDCNN_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& limit() {
  static std::atomic<std::size_t> value = [] {
    const std::size_t v = from_environment();
    blas::set_threads(static_cast<int>(v));
    return v;
  }();
  return value;
}

}  // namespace

std::size_t thread_limit() { return limit().load(); }

void set_thread_limit(std::size_t threads) {
  threads = std::max<std::size_t>(1, threads);
  limit().store(threads);
  blas::set_threads(static_cast<int>(threads));
}

}  // namespace randcnn
