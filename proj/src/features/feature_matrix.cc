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

#include "stepalign/features/feature_matrix.h"

#include "stepalign/error.h"

namespace stepalign {

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ValidationError("feature matrix must have at least one row and one column");
  }
  if (!values_.all_finite()) throw ValidationError("feature matrix has non-finite values");
}

Matrix round_to_float32(Matrix m) {
  for (double& x : m.flat()) x = static_cast<double>(static_cast<float>(x));
  return m;
}

}  // namespace stepalign
