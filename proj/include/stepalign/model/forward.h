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

// Inference path of the step-slot model.
//
//   X  = H_v P_v                    frames in the working space (L x d')
//   S  = softmax(Q W_q (X W_k)^T / sqrt(d')) (X W_v) W_o      (U x d')
//   T  = H_t P_t                    step texts in the working space (K x d')
//
// H_v and H_t rows are l2-normalized first unless disabled.

#include <cstdint>
#include <vector>

#include "stepalign/align/cost_matrix.h"
#include "stepalign/align/decode.h"
#include "stepalign/features/feature_matrix.h"
#include "stepalign/model/params.h"

namespace stepalign {

// Activations of one forward pass, kept for the backward pass.
struct SlotForward {
  Matrix inputs;  // H_v after optional normalization, L x d
  Matrix x;       // L x d'
  Matrix q;       // Q W_q, U x d'
  Matrix k;       // X W_k, L x d'
  Matrix v;       // X W_v, L x d'
  Matrix attn;    // U x L, rows sum to 1
  Matrix av;      // attn V, U x d'
  Matrix slots;   // U x d'
  std::uint64_t generation = 0;
};

// Throws ValidationError when the video dimension differs from the model's.
SlotForward forward_slots(const ModelParams& params, const FeatureMatrix& video,
                          bool normalize_input = true);

Matrix normalize_input(const Matrix& h, bool normalize);
Matrix project_text(const ModelParams& params, const FeatureMatrix& step_text,
                    bool normalize_input = true);

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& z);

struct SlotSelection {
  std::vector<int> slot_for_step;  // K entries
  AlignmentPath path;              // steps x slots
};

// Matches the K step rows of `text` to the U slot rows of `slots` with
// Drop-DTW on cost -cos: steps must all match, slots may drop at the
// drop_pct percentile cost, and no slot serves two steps. A step matched to
// several slots keeps the one with the lowest cost (lowest index on ties).
// Throws ValidationError when K > U.
SlotSelection select_slots(const Matrix& slots, const Matrix& text, double drop_pct);

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows);

struct AlignOptions {
  double drop_pct = 80.0;
  bool normalize_input = true;
  // Lets a step go undetected (two-sided alignment) instead of forcing
  // every step onto at least one frame.
  bool allow_step_drop = false;
};

struct AlignmentResult {
  std::vector<StepSegment> segments;  // sorted by step, at most one per step
  AlignmentPath path;                 // selected slots (step order) x frames
  std::vector<int> slot_for_step;
};

AlignmentResult align_video(const ModelParams& params, const FeatureMatrix& video,
                            const FeatureMatrix& step_text, const AlignOptions& opts = {});

}  // namespace stepalign
