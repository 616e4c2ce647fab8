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

// Training objectives of the step-slot model.
//
// Supervised loss for one step slot s and its ground-truth frames P:
//   -log( sum_{j in P} exp(cos(s, x_j) / gamma) / sum_l exp(cos(s, x_l) / gamma) )
// The temperature divides the cosine inside the exponent.
//
// Global loss: each video is pooled to (mean of its selected slots, mean of
// its projected step texts). Pooled slots and texts of a batch form a
// B x B cosine / gamma logit matrix scored by InfoNCE in both directions
// (video-to-text rows and text-to-video columns), averaged over videos and
// directions.

#include <span>
#include <vector>

#include "stepalign/dataset/types.h"
#include "stepalign/simd/matrix.h"

namespace stepalign {

// Cosine without clamping, plus its gradients scaled by `upstream` added
// into grad_u / grad_v when given.
double cosine_with_grad(std::span<const double> u, std::span<const double> v, double upstream,
                        std::span<double> grad_u, std::span<double> grad_v);

// `positives` are the ground-truth segments of the step; their frame union
// forms the numerator set. Gradients are accumulated (+=) when the output
// pointers are non-null; grad_frames must be frames-shaped.
double loss_supervised(std::span<const double> slot, std::span<const Segment> positives,
                       const Matrix& frames, double gamma, std::span<double> grad_slot = {},
                       Matrix* grad_frames = nullptr);

double loss_supervised(std::span<const double> slot, const Segment& segment,
                       const Matrix& frames, double gamma);

// selected_slots[b] (K_b x d') and texts[b] (K_b x d') belong to video b.
// Throws ValidationError for fewer than two videos. Gradients are
// accumulated into grad_slots / grad_texts when given (shapes must match).
double loss_global(std::span<const Matrix> selected_slots, std::span<const Matrix> texts,
                   double gamma, std::vector<Matrix>* grad_slots = nullptr,
                   std::vector<Matrix>* grad_texts = nullptr);

}  // namespace stepalign
