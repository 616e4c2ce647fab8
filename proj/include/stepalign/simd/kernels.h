// Copyright 2026 The StepAlign Authors.
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

// Data-parallel float64 kernels used by every numeric inner loop in the
// project. Two implementations exist: a portable scalar reference and an
// AVX2+FMA variant. The active one is picked once at startup from CPUID;
// set STEPALIGN_SIMD=scalar in the environment to pin the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace stepalign::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend b);

// Function table shared by all backends. Lengths are taken from the first
// span; callers guarantee matching sizes.
struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y *= alpha
  void (*scale)(double alpha, double* y, std::size_t n);
  // y += x
  void (*add)(const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without AVX2 or the CPU lacks it.
const KernelTable* avx2_kernels();

const KernelTable& active();
Backend active_backend();
// Test hook. Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend b);
bool backend_available(Backend b);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<double> y) {
  active().scale(alpha, y.data(), y.size());
}
inline void add(std::span<const double> x, std::span<double> y) {
  active().add(x.data(), y.data(), x.size());
}

}  // namespace stepalign::simd
