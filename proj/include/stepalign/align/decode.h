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

#include <map>
#include <utility>
#include <vector>

#include "stepalign/align/cost_matrix.h"
#include "stepalign/dataset/types.h"

namespace stepalign {

struct StepSegment {
  int step = 0;  // 1-based
  Segment segment;

  bool operator==(const StepSegment&) const = default;
};

// Turns a slots-by-frames path into one segment per step:
// [first matched frame, last matched frame + 1). Steps whose slot has no
// match are absent. Output is sorted by step. Throws ValidationError when a
// matched slot has no step or a frame lies outside [0, num_frames).
std::vector<StepSegment> decode_segments(const AlignmentPath& path,
                                         const std::map<int, int>& slot_to_step,
                                         int num_frames);

}  // namespace stepalign
