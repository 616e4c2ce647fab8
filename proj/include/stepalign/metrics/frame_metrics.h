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

#include "stepalign/align/decode.h"
#include "stepalign/dataset/types.h"

namespace stepalign {

inline constexpr int kBackground = 0;

// Per-frame label: kBackground or a 1-based step index.
using FrameLabeling = std::vector<int>;

enum class RasterMode {
  kGroundTruth,  // overlapping segments are an error
  kPrediction,   // higher steps overwrite lower ones on overlap
};

FrameLabeling rasterize(std::span<const StepSegment> segments, int num_frames, RasterMode mode);

// Defined-step segments of an annotation; undefined segments stay background.
FrameLabeling rasterize_ground_truth(const AnnotatedVideo& video);

struct FrameMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mof = 0.0;
};

// Precision: correctly labelled step frames / frames predicted as steps.
// Recall: correctly labelled step frames / step frames in the ground truth.
// MoF: frames whose label (background included) matches / all frames.
// 0/0 is reported as 0.
FrameMetrics frame_metrics(const FrameLabeling& pred, const FrameLabeling& gt);

// Unweighted mean of each field.
FrameMetrics mean_frame_metrics(std::span<const FrameMetrics> per_video);

}  // namespace stepalign
