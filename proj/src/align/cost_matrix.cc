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

#include "stepalign/align/cost_matrix.h"

#include <algorithm>
#include <cmath>

#include "stepalign/error.h"
#include "stepalign/features/vector_ops.h"

namespace stepalign {

CostMatrix::CostMatrix(Matrix cost) : cost_(std::move(cost)) {
  if (cost_.rows() == 0 || cost_.cols() == 0) throw ValidationError("cost matrix is empty");
  if (!cost_.all_finite()) throw ValidationError("cost matrix has non-finite entries");
}

CostMatrix negative_cosine_cost(const Matrix& slots, const Matrix& items) {
  if (slots.cols() != items.cols()) {
    throw ValidationError("negative_cosine_cost: dimension mismatch");
  }
  Matrix c(slots.rows(), items.rows());
  for (std::size_t i = 0; i < slots.rows(); ++i) {
    for (std::size_t j = 0; j < items.rows(); ++j) c(i, j) = -cosine(slots.row(i), items.row(j));
  }
  return CostMatrix(std::move(c));
}

double percentile_drop_cost(const CostMatrix& cost, double pct) {
  if (!(pct > 0.0 && pct <= 100.0)) {
    throw ValidationError("percentile must be in (0, 100]");
  }
  std::vector<double> v(cost.values().flat().begin(), cost.values().flat().end());
  if (v.empty()) throw ValidationError("percentile of an empty matrix");
  const std::size_t n = v.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(v.begin(), v.begin() + (rank - 1), v.end());
  return v[rank - 1];
}

}  // namespace stepalign
