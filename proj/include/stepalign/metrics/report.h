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

// Per-fold metric tables and their JSON / CSV forms.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "stepalign/metrics/frame_metrics.h"
#include "stepalign/metrics/map.h"

namespace stepalign {

struct FoldMetrics {
  int fold_id = 0;
  FrameMetrics frame;
  // Absent when the fold's test set has no mistake or correction instance.
  std::optional<MapResult> map;
};

struct MetricReport {
  std::vector<FoldMetrics> folds;
  FrameMetrics mean_frame;
  // Means over the folds that have a defined mAP; empty when none has.
  std::vector<double> thresholds;
  std::vector<double> mean_map;
  std::optional<double> mean_map_average;
};

// Fills the aggregate fields as arithmetic means over folds.
MetricReport make_report(std::vector<FoldMetrics> folds);

nlohmann::json to_json(const FrameMetrics& m);
nlohmann::json to_json(const MapResult& m);
nlohmann::json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const nlohmann::json& j);

// Header plus one row per fold and a final "mean" row. Undefined mAP cells
// are left empty.
std::string to_csv(const MetricReport& r);

}  // namespace stepalign
