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

#include "stepalign/align/decode.h"

#include <algorithm>
#include <string>

#include "stepalign/error.h"

namespace stepalign {

std::vector<StepSegment> decode_segments(const AlignmentPath& path,
                                         const std::map<int, int>& slot_to_step,
                                         int num_frames) {
  std::map<int, Segment> extent;  // step -> [min, max + 1)
  for (const auto& [slot, frame] : path.matches) {
    auto it = slot_to_step.find(slot);
    if (it == slot_to_step.end()) {
      throw ValidationError("decode_segments: slot " + std::to_string(slot) +
                            " is matched but has no step");
    }
    if (frame < 0 || frame >= num_frames) {
      throw ValidationError("decode_segments: frame " + std::to_string(frame) +
                            " outside the video");
    }
    auto [pos, inserted] = extent.try_emplace(it->second, Segment{frame, frame + 1});
    if (!inserted) {
      pos->second.start = std::min(pos->second.start, frame);
      pos->second.end = std::max(pos->second.end, frame + 1);
    }
  }
  std::vector<StepSegment> out;
  out.reserve(extent.size());
  for (const auto& [step, seg] : extent) out.push_back({step, seg});
  return out;
}

}  // namespace stepalign
