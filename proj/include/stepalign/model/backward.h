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

// Batch objective w_sup * L_sup + w_global * L_global and its exact
// gradient. Slot selection is a discrete choice made during the forward
// pass and held fixed for the backward pass.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stepalign/features/feature_matrix.h"
#include "stepalign/model/forward.h"
#include "stepalign/model/params.h"

namespace stepalign {

struct TrainingExample {
  std::string video_id;
  const FeatureMatrix* video = nullptr;
  const FeatureMatrix* step_text = nullptr;  // K rows
  // positives[k]: ground-truth segments of step k + 1; empty when the step
  // does not occur in the video.
  std::vector<std::vector<Segment>> positives;
};

TrainingExample make_training_example(const AnnotatedVideo& annotation,
                                      const FeatureMatrix& video,
                                      const FeatureMatrix& step_text);

struct LossConfig {
  double gamma = 0.03;
  double w_sup = 1.0;
  double w_global = 1.0;
  double drop_pct = 80.0;
  bool normalize_input = true;
};

struct BatchForward {
  std::vector<SlotForward> videos;
  std::vector<Matrix> text_inputs;  // normalized H_t
  std::vector<Matrix> texts;        // projected, K x d'
  std::vector<std::vector<int>> slot_for_step;
  std::uint64_t generation = 0;
};

// Runs the model on every example and selects slots, unless
// `fixed_selection` supplies the slot of every step.
BatchForward forward_batch(const ModelParams& params, std::span<const TrainingExample> batch,
                           const LossConfig& cfg,
                           const std::vector<std::vector<int>>* fixed_selection = nullptr);

struct LossValue {
  double total = 0.0;
  double supervised = 0.0;  // mean over (video, present step)
  double global = 0.0;
};

struct Gradients {
  ModelParams grad;  // same shapes as the parameters
  LossValue loss;
};

LossValue batch_loss(const BatchForward& fwd, std::span<const TrainingExample> batch,
                     const LossConfig& cfg);

// Throws ValidationError when `fwd` was computed from a different parameter
// generation (stale cache), and when the global loss is enabled for a batch
// of one.
Gradients backward(const ModelParams& params, const BatchForward& fwd,
                   std::span<const TrainingExample> batch, const LossConfig& cfg);

}  // namespace stepalign
