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

#include <cstddef>
#include <utility>
#include <vector>

#include "stepalign/simd/matrix.h"

namespace stepalign {

// cost(i, j): cost of matching slot i to item j. Finite and non-empty.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix cost);

  std::size_t n_slots() const { return cost_.rows(); }
  std::size_t n_items() const { return cost_.cols(); }
  double operator()(std::size_t slot, std::size_t item) const { return cost_(slot, item); }
  const Matrix& values() const { return cost_; }

 private:
  Matrix cost_;
};

// cost(i, j) = -cos(slots_i, items_j).
CostMatrix negative_cosine_cost(const Matrix& slots, const Matrix& items);

// Nearest-rank percentile over all entries: the ceil(pct / 100 * n)-th
// smallest value (1-based). pct in (0, 100].
double percentile_drop_cost(const CostMatrix& cost, double pct);

struct AlignmentPath {
  // (slot, item) pairs, nondecreasing in both coordinates.
  std::vector<std::pair<int, int>> matches;
  std::vector<int> dropped_items;
  std::vector<int> dropped_slots;
  double total_cost = 0.0;
};

}  // namespace stepalign
