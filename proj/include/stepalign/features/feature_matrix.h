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
#include <span>

#include "stepalign/simd/matrix.h"

namespace stepalign {

// One row per frame (or per step text), `dim` columns. Non-empty and finite
// by construction.
class FeatureMatrix {
 public:
  // Throws ValidationError when empty or non-finite.
  explicit FeatureMatrix(Matrix values);

  std::size_t rows() const { return values_.rows(); }
  std::size_t dim() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  std::span<const double> row(std::size_t r) const { return values_.row(r); }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  Matrix values_;
};

// Rounds every entry to the nearest float32, the on-disk precision.
Matrix round_to_float32(Matrix m);

}  // namespace stepalign
