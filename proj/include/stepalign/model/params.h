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

// Trainable state of the step-slot model: input projections for frames and
// step texts, U learnable step queries and one cross-attention decoder layer.

#include <array>
#include <cstdint>
#include <string_view>

#include "stepalign/simd/matrix.h"

namespace stepalign {

struct ModelShape {
  int dim = 64;           // input feature dimension d
  int d_prime = 64;       // working dimension d'
  int num_queries = 32;   // U
};

inline constexpr int kNumModelTensors = 7;
inline constexpr std::array<std::string_view, kNumModelTensors> kModelTensorNames = {
    "proj_v", "proj_t", "queries", "w_q", "w_k", "w_v", "w_o"};

struct ModelParams {
  ModelShape shape;
  Matrix proj_v;   // d x d'
  Matrix proj_t;   // d x d'
  Matrix queries;  // U x d'
  Matrix w_q;      // d' x d'
  Matrix w_k;      // d' x d'
  Matrix w_v;      // d' x d'
  Matrix w_o;      // d' x d'
  // Bumped by every in-place update; forward caches remember it.
  std::uint64_t generation = 0;

  // Tensors in checkpoint order.
  std::array<Matrix*, kNumModelTensors> tensors();
  std::array<const Matrix*, kNumModelTensors> tensors() const;
  bool all_finite() const;
};

// All tensors zero, with the shapes implied by `shape`.
ModelParams zero_params(const ModelShape& shape);

// Frame and text projections start from one shared random matrix so that
// frames and their step texts begin in a common space; the attention
// matrices start at the identity and queries are Gaussian with standard
// deviation query_scale.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed, double query_scale = 1.0);

// Rounds every tensor to float32, the checkpoint precision.
void round_params_to_float32(ModelParams& p);

// Throws ValidationError when a tensor shape disagrees with `shape`.
void check_shapes(const ModelParams& p);

}  // namespace stepalign
