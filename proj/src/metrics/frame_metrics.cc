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

#include "stepalign/metrics/frame_metrics.h"

#include <string>

#include "stepalign/error.h"

namespace stepalign {

FrameLabeling rasterize(std::span<const StepSegment> segments, int num_frames, RasterMode mode) {
  if (num_frames < 0) throw ValidationError("rasterize: negative num_frames");
  FrameLabeling out(num_frames, kBackground);
  std::vector<const StepSegment*> order;
  for (const auto& s : segments) order.push_back(&s);
  if (mode == RasterMode::kPrediction) {
    std::stable_sort(order.begin(), order.end(),
                     [](const StepSegment* a, const StepSegment* b) { return a->step < b->step; });
  }
  for (const StepSegment* s : order) {
    if (s->step < 1) throw ValidationError("rasterize: step index must be >= 1");
    if (s->segment.start < 0 || s->segment.end > num_frames ||
        s->segment.end <= s->segment.start) {
      throw ValidationError("rasterize: segment out of bounds");
    }
    for (int f = s->segment.start; f < s->segment.end; ++f) {
      if (mode == RasterMode::kGroundTruth && out[f] != kBackground) {
        throw ValidationError("rasterize: ground-truth segments overlap at frame " +
                              std::to_string(f));
      }
      out[f] = s->step;
    }
  }
  return out;
}

FrameLabeling rasterize_ground_truth(const AnnotatedVideo& video) {
  std::vector<StepSegment> segs;
  for (const auto& s : video.segments) {
    if (s.step.is_defined()) segs.push_back({s.step.index(), s.segment});
  }
  return rasterize(segs, video.num_frames, RasterMode::kGroundTruth);
}

FrameMetrics frame_metrics(const FrameLabeling& pred, const FrameLabeling& gt) {
  if (pred.size() != gt.size()) throw ValidationError("frame_metrics: length mismatch");
  long correct_steps = 0, pred_steps = 0, gt_steps = 0, equal = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != kBackground;
    const bool g = gt[i] != kBackground;
    pred_steps += p;
    gt_steps += g;
    correct_steps += p && pred[i] == gt[i];
    equal += pred[i] == gt[i];
  }
  FrameMetrics m;
  m.precision = pred_steps > 0 ? static_cast<double>(correct_steps) / pred_steps : 0.0;
  m.recall = gt_steps > 0 ? static_cast<double>(correct_steps) / gt_steps : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.mof = pred.empty() ? 0.0 : static_cast<double>(equal) / static_cast<double>(pred.size());
  return m;
}

FrameMetrics mean_frame_metrics(std::span<const FrameMetrics> per_video) {
  FrameMetrics m;
  if (per_video.empty()) return m;
  for (const auto& v : per_video) {
    m.precision += v.precision;
    m.recall += v.recall;
    m.f1 += v.f1;
    m.mof += v.mof;
  }
  const double n = static_cast<double>(per_video.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.mof /= n;
  return m;
}

}  // namespace stepalign
