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

#include <span>
#include <vector>

#include "stepalign/dataset/types.h"
#include "stepalign/features/feature_matrix.h"

namespace stepalign {

// Mean of rows [seg.start, seg.end). Throws ValidationError for an empty or
// out-of-range segment.
std::vector<double> mean_pool(const FeatureMatrix& m, const Segment& seg);
std::vector<double> mean_pool(const Matrix& m, const Segment& seg);

double norm(std::span<const double> v);

// dot(u, v) / (|u| |v|). Zero vectors are an error, not an epsilon.
double cosine(std::span<const double> u, std::span<const double> v);

// Returns a copy with every row scaled to unit l2 norm. Zero rows throw.
Matrix l2_normalize_rows(const Matrix& m);

}  // namespace stepalign
