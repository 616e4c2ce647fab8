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

#include "stepalign/features/vector_ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "stepalign/error.h"
#include "stepalign/simd/kernels.h"

namespace stepalign {

std::vector<double> mean_pool(const Matrix& m, const Segment& seg) {
  if (seg.end <= seg.start) throw ValidationError("mean_pool: segment empty");
  if (seg.start < 0 || static_cast<std::size_t>(seg.end) > m.rows()) {
    throw ValidationError("mean_pool: segment [" + std::to_string(seg.start) + ", " +
                          std::to_string(seg.end) + ") outside " +
                          std::to_string(m.rows()) + " rows");
  }
  std::vector<double> out(m.cols(), 0.0);
  for (int r = seg.start; r < seg.end; ++r) simd::add(m.row(r), out);
  simd::scale(1.0 / seg.length(), out);
  return out;
}

std::vector<double> mean_pool(const FeatureMatrix& m, const Segment& seg) {
  return mean_pool(m.values(), seg);
}

double norm(std::span<const double> v) { return std::sqrt(simd::sum_squares(v)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine: zero vector");
  return std::clamp(simd::dot(u, v) / (nu * nv), -1.0, 1.0);
}

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double n = norm(out.row(r));
    if (n == 0.0) throw ValidationError("l2_normalize_rows: zero row " + std::to_string(r));
    simd::scale(1.0 / n, out.row(r));
  }
  return out;
}

}  // namespace stepalign
