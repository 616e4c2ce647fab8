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

#include "stepalign/dataset/agreement.h"

#include <algorithm>
#include <array>
#include <set>
#include <tuple>

#include "stepalign/error.h"

namespace stepalign {

namespace {

std::vector<char> step_mask(const AnnotatedVideo& v, int step) {
  std::vector<char> mask(v.num_frames, 0);
  for (const auto& s : v.segments) {
    if (s.step.is_defined() && s.step.index() == step) {
      for (int f = s.segment.start; f < s.segment.end; ++f) mask[f] = 1;
    }
  }
  return mask;
}

}  // namespace

double segment_tiou(const Segment& a, const Segment& b) {
  const int inter = std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const int uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

double agreement_tiou(const AnnotatedVideo& a, const AnnotatedVideo& b) {
  if (a.video_id != b.video_id) {
    throw ValidationError("agreement between different videos '" + a.video_id + "' and '" +
                          b.video_id + "'");
  }
  if (a.num_frames != b.num_frames) {
    throw ValidationError("agreement on '" + a.video_id + "': num_frames differ");
  }
  std::set<int> steps;
  for (const auto* v : {&a, &b}) {
    for (const auto& s : v->segments) {
      if (s.step.is_defined()) steps.insert(s.step.index());
    }
  }
  if (steps.empty()) return 1.0;
  double total = 0.0;
  for (int step : steps) {
    const auto ma = step_mask(a, step);
    const auto mb = step_mask(b, step);
    int inter = 0, uni = 0;
    for (int f = 0; f < a.num_frames; ++f) {
      inter += ma[f] && mb[f];
      uni += ma[f] || mb[f];
    }
    total += uni > 0 ? static_cast<double>(inter) / uni : 0.0;
  }
  return total / static_cast<double>(steps.size());
}

double aggregate_agreement(std::span<const std::pair<AnnotatedVideo, AnnotatedVideo>> pairs) {
  if (pairs.empty()) throw ValidationError("aggregate agreement over no videos");
  double total = 0.0;
  for (const auto& [a, b] : pairs) total += agreement_tiou(a, b);
  return total / static_cast<double>(pairs.size());
}

double cohens_kappa(std::span<const CoarseLabel> a, std::span<const CoarseLabel> b) {
  if (a.empty() || b.empty()) throw ValidationError("cohens_kappa on empty label lists");
  if (a.size() != b.size()) throw ValidationError("cohens_kappa: label lists differ in length");
  const double n = static_cast<double>(a.size());
  std::array<double, kNumCoarseLabels> ca{}, cb{};
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[static_cast<int>(a[i])] += 1.0;
    cb[static_cast<int>(b[i])] += 1.0;
    agree += a[i] == b[i] ? 1.0 : 0.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (int c = 0; c < kNumCoarseLabels; ++c) pe += (ca[c] / n) * (cb[c] / n);
  if (pe == 1.0) {
    // Only one label in use on both sides, hence po == 1.
    return 1.0;
  }
  return (po - pe) / (1.0 - pe);
}

PairedLabels pair_labels(const AnnotatedVideo& a, const AnnotatedVideo& b) {
  // (tIoU, index in a, index in b); highest tIoU first, then lowest indices.
  std::vector<std::tuple<double, int, int>> candidates;
  for (int i = 0; i < static_cast<int>(a.segments.size()); ++i) {
    for (int j = 0; j < static_cast<int>(b.segments.size()); ++j) {
      if (a.segments[i].step != b.segments[j].step) continue;
      const double t = segment_tiou(a.segments[i].segment, b.segments[j].segment);
      if (t > 0.0) candidates.emplace_back(t, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::make_pair(std::get<1>(x), std::get<2>(x)) <
           std::make_pair(std::get<1>(y), std::get<2>(y));
  });
  std::vector<int> match_of_a(a.segments.size(), -1);
  std::vector<char> used_b(b.segments.size(), 0);
  for (const auto& [t, i, j] : candidates) {
    if (match_of_a[i] >= 0 || used_b[j]) continue;
    match_of_a[i] = j;
    used_b[j] = 1;
  }
  PairedLabels out;
  for (int i = 0; i < static_cast<int>(a.segments.size()); ++i) {
    if (match_of_a[i] < 0) continue;
    out.a.push_back(coarse_label(a.segments[i].mistake));
    out.b.push_back(coarse_label(b.segments[match_of_a[i]].mistake));
  }
  return out;
}

}  // namespace stepalign
