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

// Teacher-forced training of the mistake classifier and detection over
// aligned segments.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stepalign/align/decode.h"
#include "stepalign/classifier/classifier.h"
#include "stepalign/metrics/map.h"
#include "stepalign/model/optimizer.h"
#include "stepalign/model/train.h"

namespace stepalign {

struct ClassifierConfig {
  int hidden = 256;
  int epochs = 1200;
  int batch_size = 32;
  AdamConfig adam;
  double beta = 0.9999;
  std::uint64_t seed = 0;
  // Validation every eval_every epochs (and after the last one).
  int eval_every = 50;
  // Zero the text half of every input, at training and at test time.
  bool video_only = false;
};

void validate(const ClassifierConfig& cfg);

struct SegmentSample {
  std::string video_id;
  int step = 0;  // 0 for undefined segments
  Segment segment;
  CoarseLabel label = CoarseLabel::kCorrect;
  std::vector<double> x;
};

// One sample per annotated segment. Undefined segments get a zero text
// feature.
std::vector<SegmentSample> teacher_forced_samples(std::span<const EvalVideo> videos,
                                                  bool video_only);

// Class counts of the samples. Classes without samples stay unset.
ClassBalanceConfig class_balance(std::span<const SegmentSample> samples, double beta);

struct ClassifierTrainResult {
  ClassifierParams best;
  int best_epoch = 0;
  double best_val_score = 0.0;
  // "map" (average mAP on teacher-forced validation segments), or
  // "accuracy" when the validation videos hold no mistake or correction.
  std::string val_metric;
  std::vector<std::pair<int, double>> val_log;   // (epoch, score)
  std::vector<double> train_loss;                // per epoch, index 0 = epoch 1
};

// Throws ValidationError when a class has no training sample.
ClassifierTrainResult train_classifier(std::span<const EvalVideo> train,
                                       std::span<const EvalVideo> val,
                                       const ClassifierConfig& cfg);

// Classifies each segment of `segments` (steps are 1-based into step_text).
// Confidence is the softmax probability of the predicted class.
std::vector<Detection> detect_mistakes(const ClassifierParams& params,
                                       const std::string& video_id,
                                       std::span<const StepSegment> segments,
                                       const FeatureMatrix& video,
                                       const FeatureMatrix& step_text, bool video_only);

// Detections on the defined ground-truth segments of each video.
std::vector<Detection> detect_on_ground_truth(const ClassifierParams& params,
                                              std::span<const EvalVideo> videos,
                                              bool video_only);

}  // namespace stepalign
