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

// Step-matched mean average precision at temporal IoU thresholds.
//
// A detection is a true positive for its class when an unmatched ground-truth
// instance of the same video has the same (defined) step, the same label and
// tIoU >= threshold. Among candidates the highest tIoU wins, then the lowest
// instance index. Detections are ranked by confidence (descending), ties by
// video id, step and start frame. AP uses the all-point interpolated
// precision envelope. Only the mistake and correction classes are scored;
// a class without ground-truth instances is left out of the mean.

#include <span>
#include <string>
#include <vector>

#include "stepalign/dataset/types.h"

namespace stepalign {

struct Detection {
  std::string video_id;
  int step = 0;  // 1-based
  Segment segment;
  CoarseLabel label = CoarseLabel::kCorrect;
  double confidence = 1.0;  // (0, 1]
};

struct GroundTruthInstance {
  std::string video_id;
  StepRef step;
  Segment segment;
  CoarseLabel label = CoarseLabel::kCorrect;
};

// One instance per annotated segment; undefined-step segments are kept but can
// never be matched, and are not counted by map_at_tiou.
std::vector<GroundTruthInstance> ground_truth_instances(const AnnotatedVideo& video);

inline constexpr double kDefaultThresholds[] = {0.1, 0.2, 0.3};

struct MapResult {
  std::vector<double> thresholds;
  std::vector<double> map;  // per threshold
  double average = 0.0;     // mean over thresholds
  // ap[t][c]: AP of class c at threshold t, -1 when the class has no GT.
  std::vector<std::vector<double>> ap;
};

// Throws ValidationError when neither scored class has ground truth.
MapResult map_at_tiou(std::span<const Detection> detections,
                      std::span<const GroundTruthInstance> ground_truth,
                      std::span<const double> thresholds = kDefaultThresholds);

// AP of one class at one threshold; NaN when the class has no scorable GT.
double average_precision(std::span<const Detection> detections,
                         std::span<const GroundTruthInstance> ground_truth, CoarseLabel cls,
                         double threshold);

}  // namespace stepalign
