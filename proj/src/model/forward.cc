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

#include "stepalign/model/forward.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "stepalign/align/drop_dtw.h"
#include "stepalign/error.h"
#include "stepalign/features/vector_ops.h"

namespace stepalign {

Matrix normalize_input(const Matrix& h, bool normalize) {
  return normalize ? l2_normalize_rows(h) : h;
}

Matrix softmax_rows(const Matrix& z) {
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto in = z.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    auto o = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    for (double& x : o) x /= sum;
  }
  return out;
}

SlotForward forward_slots(const ModelParams& params, const FeatureMatrix& video,
                          bool normalize) {
  if (video.dim() != static_cast<std::size_t>(params.shape.dim)) {
    throw ValidationError("forward_slots: video dim " + std::to_string(video.dim()) +
                          " != model dim " + std::to_string(params.shape.dim));
  }
  SlotForward f;
  f.generation = params.generation;
  f.inputs = normalize_input(video.values(), normalize);
  f.x = matmul(f.inputs, params.proj_v);
  f.q = matmul(params.queries, params.w_q);
  f.k = matmul(f.x, params.w_k);
  f.v = matmul(f.x, params.w_v);
  Matrix logits = matmul_nt(f.q, f.k);
  const double inv = 1.0 / std::sqrt(static_cast<double>(params.shape.d_prime));
  for (double& z : logits.flat()) z *= inv;
  f.attn = softmax_rows(logits);
  f.av = matmul(f.attn, f.v);
  f.slots = matmul(f.av, params.w_o);
  if (!f.slots.all_finite()) throw NumericalError("forward_slots: non-finite step slots");
  return f;
}

Matrix project_text(const ModelParams& params, const FeatureMatrix& step_text, bool normalize) {
  if (step_text.dim() != static_cast<std::size_t>(params.shape.dim)) {
    throw ValidationError("project_text: text dim " + std::to_string(step_text.dim()) +
                          " != model dim " + std::to_string(params.shape.dim));
  }
  return matmul(normalize_input(step_text.values(), normalize), params.proj_t);
}

SlotSelection select_slots(const Matrix& slots, const Matrix& text, double drop_pct) {
  const std::size_t K = text.rows(), U = slots.rows();
  if (K == 0) throw ValidationError("select_slots: no steps");
  if (K > U) {
    throw ValidationError("select_slots: " + std::to_string(K) + " steps exceed " +
                          std::to_string(U) + " slots");
  }
  CostMatrix cost = negative_cosine_cost(text, slots);
  const double drop = percentile_drop_cost(cost, drop_pct);
  SlotSelection sel;
  sel.path = drop_dtw(cost, drop, std::nullopt, ItemMatching::kExclusive);
  sel.slot_for_step.assign(K, -1);
  for (const auto& [step, slot] : sel.path.matches) {
    int& cur = sel.slot_for_step[step];
    if (cur < 0 || cost(step, slot) < cost(step, cur)) cur = slot;
  }
  return sel;
}

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

AlignmentResult align_video(const ModelParams& params, const FeatureMatrix& video,
                            const FeatureMatrix& step_text, const AlignOptions& opts) {
  const SlotForward f = forward_slots(params, video, opts.normalize_input);
  const Matrix text = project_text(params, step_text, opts.normalize_input);
  SlotSelection sel = select_slots(f.slots, text, opts.drop_pct);

  CostMatrix cost = negative_cosine_cost(gather_rows(f.slots, sel.slot_for_step), f.x);
  const double drop = percentile_drop_cost(cost, opts.drop_pct);
  AlignmentResult r;
  if (!opts.allow_step_drop && video.rows() < text.rows()) {
    throw ValidationError("align_video: " + std::to_string(video.rows()) + " frames for " +
                          std::to_string(text.rows()) + " steps");
  }
  r.path = drop_dtw(cost, drop,
                    opts.allow_step_drop ? std::optional<double>(drop) : std::nullopt,
                    ItemMatching::kExclusive);
  std::map<int, int> slot_to_step;
  for (int k = 0; k < static_cast<int>(text.rows()); ++k) slot_to_step[k] = k + 1;
  r.segments = decode_segments(r.path, slot_to_step, static_cast<int>(video.rows()));
  r.slot_for_step = std::move(sel.slot_for_step);
  return r;
}

}  // namespace stepalign
