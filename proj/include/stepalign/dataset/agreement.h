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
#include <utility>
#include <vector>

#include "stepalign/dataset/types.h"

namespace stepalign {

// Per-video alignment agreement in [0, 1]. For each defined step present in
// either annotation the step's extent is the union of its segments; the
// step scores |A & B| / |A | B| over frames (0 when only one side has it).
// Scores are averaged over steps. Undefined segments are ignored. Two
// annotations without defined steps agree trivially (1.0).
double agreement_tiou(const AnnotatedVideo& a, const AnnotatedVideo& b);

// Mean of agreement_tiou over video pairs.
double aggregate_agreement(std::span<const std::pair<AnnotatedVideo, AnnotatedVideo>> pairs);

// Cohen's kappa over paired labels; 1.0 when chance agreement is 1 and
// observed agreement is 1.
double cohens_kappa(std::span<const CoarseLabel> a, std::span<const CoarseLabel> b);

struct PairedLabels {
  std::vector<CoarseLabel> a;
  std::vector<CoarseLabel> b;
};

// Pairs segments of two annotations of the same video for kappa: segments
// pair only with segments carrying the same StepRef, greedily by highest
// tIoU (> 0) first; unpaired segments are left out.
PairedLabels pair_labels(const AnnotatedVideo& a, const AnnotatedVideo& b);

// tIoU of two half-open intervals.
double segment_tiou(const Segment& a, const Segment& b);

}  // namespace stepalign
