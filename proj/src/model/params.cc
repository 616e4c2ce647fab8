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

#include "stepalign/model/params.h"

#include <cmath>
#include <random>
#include <string>

#include "stepalign/error.h"
#include "stepalign/features/feature_matrix.h"

namespace stepalign {

std::array<Matrix*, kNumModelTensors> ModelParams::tensors() {
  return {&proj_v, &proj_t, &queries, &w_q, &w_k, &w_v, &w_o};
}

std::array<const Matrix*, kNumModelTensors> ModelParams::tensors() const {
  return {&proj_v, &proj_t, &queries, &w_q, &w_k, &w_v, &w_o};
}

bool ModelParams::all_finite() const {
  for (const Matrix* m : tensors()) {
    if (!m->all_finite()) return false;
  }
  return true;
}

ModelParams zero_params(const ModelShape& s) {
  if (s.dim < 1 || s.d_prime < 1 || s.num_queries < 1) {
    throw ValidationError("model shape: dim, d_prime and num_queries must be >= 1");
  }
  ModelParams p;
  p.shape = s;
  const std::size_t d = s.dim, dp = s.d_prime, u = s.num_queries;
  p.proj_v = Matrix(d, dp);
  p.proj_t = Matrix(d, dp);
  p.queries = Matrix(u, dp);
  p.w_q = Matrix(dp, dp);
  p.w_k = Matrix(dp, dp);
  p.w_v = Matrix(dp, dp);
  p.w_o = Matrix(dp, dp);
  return p;
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed, double query_scale) {
  ModelParams p = zero_params(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(shape.dim));
  for (double& x : p.proj_v.flat()) x = proj_std * normal(rng);
  p.proj_t = p.proj_v;
  for (double& x : p.queries.flat()) x = query_scale * normal(rng);
  for (Matrix* m : {&p.w_q, &p.w_k, &p.w_v, &p.w_o}) {
    for (std::size_t i = 0; i < m->rows(); ++i) (*m)(i, i) = 1.0;
  }
  return p;
}

void round_params_to_float32(ModelParams& p) {
  for (Matrix* m : p.tensors()) *m = round_to_float32(std::move(*m));
  ++p.generation;
}

void check_shapes(const ModelParams& p) {
  const std::size_t d = p.shape.dim, dp = p.shape.d_prime, u = p.shape.num_queries;
  const std::array<std::pair<std::size_t, std::size_t>, kNumModelTensors> want = {
      {{d, dp}, {d, dp}, {u, dp}, {dp, dp}, {dp, dp}, {dp, dp}, {dp, dp}}};
  const auto ts = p.tensors();
  for (int i = 0; i < kNumModelTensors; ++i) {
    if (ts[i]->rows() != want[i].first || ts[i]->cols() != want[i].second) {
      throw ValidationError("model params: tensor " + std::string(kModelTensorNames[i]) +
                            " has shape " + std::to_string(ts[i]->rows()) + "x" +
                            std::to_string(ts[i]->cols()));
    }
  }
}

}  // namespace stepalign
