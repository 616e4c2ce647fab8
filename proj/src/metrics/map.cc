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

#include "stepalign/metrics/map.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stepalign/dataset/agreement.h"
#include "stepalign/error.h"

namespace stepalign {

namespace {

constexpr CoarseLabel kScoredClasses[] = {CoarseLabel::kMistake, CoarseLabel::kCorrection};

bool scorable(const GroundTruthInstance& g, CoarseLabel cls) {
  return g.label == cls && g.step.is_defined();
}

}  // namespace

std::vector<GroundTruthInstance> ground_truth_instances(const AnnotatedVideo& video) {
  std::vector<GroundTruthInstance> out;
  for (const auto& s : video.segments) {
    out.push_back({video.video_id, s.step, s.segment, coarse_label(s.mistake)});
  }
  return out;
}

double average_precision(std::span<const Detection> detections,
                         std::span<const GroundTruthInstance> ground_truth, CoarseLabel cls,
                         double threshold) {
  std::vector<int> gt_idx;
  for (int g = 0; g < static_cast<int>(ground_truth.size()); ++g) {
    if (scorable(ground_truth[g], cls)) gt_idx.push_back(g);
  }
  if (gt_idx.empty()) return std::numeric_limits<double>::quiet_NaN();

  std::vector<const Detection*> ranked;
  for (const auto& d : detections) {
    if (!(d.confidence > 0.0 && d.confidence <= 1.0)) {
      throw ValidationError("detection confidence must be in (0, 1]");
    }
    if (d.label == cls) ranked.push_back(&d);
  }
  std::sort(ranked.begin(), ranked.end(), [](const Detection* a, const Detection* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    if (a->video_id != b->video_id) return a->video_id < b->video_id;
    if (a->step != b->step) return a->step < b->step;
    return a->segment.start < b->segment.start;
  });

  std::vector<char> used(ground_truth.size(), 0);
  std::vector<double> precision, recall;
  int tp = 0, fp = 0;
  for (const Detection* d : ranked) {
    int best = -1;
    double best_iou = -1.0;
    for (int g : gt_idx) {
      const auto& inst = ground_truth[g];
      if (used[g] || inst.video_id != d->video_id || inst.step.index() != d->step) continue;
      const double iou = segment_tiou(inst.segment, d->segment);
      if (iou >= threshold && iou > best_iou) {
        best = g;
        best_iou = iou;
      }
    }
    if (best >= 0) {
      used[best] = 1;
      ++tp;
    } else {
      ++fp;
    }
    precision.push_back(static_cast<double>(tp) / (tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_idx.size()));
  }

  // Precision envelope, then area under the stepwise curve.
  std::vector<double> mrec{0.0}, mpre{0.0};
  mrec.insert(mrec.end(), recall.begin(), recall.end());
  mpre.insert(mpre.end(), precision.begin(), precision.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) {
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  }
  return ap;
}

MapResult map_at_tiou(std::span<const Detection> detections,
                      std::span<const GroundTruthInstance> ground_truth,
                      std::span<const double> thresholds) {
  if (thresholds.empty()) throw ValidationError("map_at_tiou: no thresholds");
  MapResult r;
  r.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double t : thresholds) {
    std::vector<double> per_class(kNumCoarseLabels, -1.0);
    double sum = 0.0;
    int n = 0;
    for (CoarseLabel c : kScoredClasses) {
      const double ap = average_precision(detections, ground_truth, c, t);
      if (std::isnan(ap)) continue;
      per_class[static_cast<int>(c)] = ap;
      sum += ap;
      ++n;
    }
    if (n == 0) {
      throw ValidationError("map_at_tiou: no mistake or correction ground truth to score");
    }
    r.map.push_back(sum / n);
    r.ap.push_back(std::move(per_class));
  }
  r.average = std::accumulate(r.map.begin(), r.map.end(), 0.0) / static_cast<double>(r.map.size());
  return r;
}

}  // namespace stepalign
