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

// Mini-batch training of the step-slot model with best-on-validation
// checkpoint selection.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stepalign/metrics/frame_metrics.h"
#include "stepalign/model/backward.h"
#include "stepalign/model/forward.h"
#include "stepalign/model/optimizer.h"
#include "stepalign/model/params.h"

namespace stepalign {

struct TrainConfig {
  ModelShape shape;
  LossConfig loss;
  AdamConfig adam;
  AlignOptions align;  // used for validation
  int batch_size = 6;
  int epochs = 100;
  std::uint64_t seed = 0;
  double query_scale = 8.0;
  // Validate after every eval_every epochs (and after the last one).
  int eval_every = 1;
};

// Throws ValidationError for non-positive gamma, batch_size < 2, etc.
void validate(const TrainConfig& cfg);

// An annotated video with its features, for validation and testing.
struct EvalVideo {
  const AnnotatedVideo* annotation = nullptr;
  const FeatureMatrix* video = nullptr;
  const FeatureMatrix* step_text = nullptr;
};

struct EpochLog {
  int epoch = 0;  // 0 is the initial state
  double train_loss = 0.0;
  double supervised = 0.0;
  double global = 0.0;
  std::optional<double> val_f1;
};

struct TrainResult {
  ModelParams best;
  int best_epoch = 0;
  double best_val_f1 = 0.0;
  ModelParams last;
  std::vector<EpochLog> log;
};

// Frame metrics of align_video against each video's annotation, averaged
// over videos.
FrameMetrics evaluate_alignment(const ModelParams& params, std::span<const EvalVideo> videos,
                                const AlignOptions& opts);

// Epoch 0 evaluates the initial parameters; the best checkpoint is the first
// with the highest validation F1 (the last parameters when `val` is empty).
// Batch order is reshuffled each epoch from the seed. A non-finite loss
// raises NumericalError naming the epoch and the batch's videos.
TrainResult train_alignment(std::span<const TrainingExample> train,
                            std::span<const EvalVideo> val, const TrainConfig& cfg);

}  // namespace stepalign
