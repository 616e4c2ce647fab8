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

#include "stepalign/metrics/report.h"

#include <cstdio>
#include <sstream>

#include "stepalign/error.h"

namespace stepalign {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string threshold_tag(double t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", t);
  return buf;
}

FrameMetrics frame_from_json(const nlohmann::json& j) {
  FrameMetrics m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.mof = j.at("mof").get<double>();
  return m;
}

}  // namespace

MetricReport make_report(std::vector<FoldMetrics> folds) {
  MetricReport r;
  r.folds = std::move(folds);
  std::vector<FrameMetrics> frames;
  for (const auto& f : r.folds) frames.push_back(f.frame);
  r.mean_frame = mean_frame_metrics(frames);

  int defined = 0;
  double avg = 0.0;
  for (const auto& f : r.folds) {
    if (!f.map) continue;
    if (defined == 0) {
      r.thresholds = f.map->thresholds;
      r.mean_map.assign(r.thresholds.size(), 0.0);
    } else if (f.map->thresholds != r.thresholds) {
      throw ValidationError("make_report: folds use different mAP thresholds");
    }
    for (std::size_t t = 0; t < r.mean_map.size(); ++t) r.mean_map[t] += f.map->map[t];
    avg += f.map->average;
    ++defined;
  }
  if (defined > 0) {
    for (double& v : r.mean_map) v /= defined;
    r.mean_map_average = avg / defined;
  }
  return r;
}

nlohmann::json to_json(const FrameMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"mof", m.mof}};
}

nlohmann::json to_json(const MapResult& m) {
  return {{"thresholds", m.thresholds}, {"map", m.map}, {"average", m.average}, {"ap", m.ap}};
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold_id", f.fold_id},
                     {"frame", to_json(f.frame)},
                     {"map", f.map ? to_json(*f.map) : nlohmann::json()}});
  }
  nlohmann::json mean = {{"frame", to_json(r.mean_frame)},
                         {"thresholds", r.thresholds},
                         {"map", r.mean_map},
                         {"map_average", r.mean_map_average ? nlohmann::json(*r.mean_map_average)
                                                            : nlohmann::json()}};
  return {{"per_fold", folds}, {"mean", mean}};
}

MetricReport metric_report_from_json(const nlohmann::json& j) {
  try {
    std::vector<FoldMetrics> folds;
    for (const auto& f : j.at("per_fold")) {
      FoldMetrics m;
      m.fold_id = f.at("fold_id").get<int>();
      m.frame = frame_from_json(f.at("frame"));
      if (!f.at("map").is_null()) {
        MapResult mr;
        mr.thresholds = f["map"].at("thresholds").get<std::vector<double>>();
        mr.map = f["map"].at("map").get<std::vector<double>>();
        mr.average = f["map"].at("average").get<double>();
        mr.ap = f["map"].at("ap").get<std::vector<std::vector<double>>>();
        m.map = std::move(mr);
      }
      folds.push_back(std::move(m));
    }
    return make_report(std::move(folds));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metric report: ") + e.what());
  }
}

std::string to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "fold,precision,recall,f1,mof";
  for (double t : r.thresholds) os << ",map@" << threshold_tag(t);
  os << ",map_avg\n";
  for (const auto& f : r.folds) {
    os << f.fold_id << ',' << fmt(f.frame.precision) << ',' << fmt(f.frame.recall) << ','
       << fmt(f.frame.f1) << ',' << fmt(f.frame.mof);
    for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
      os << ',' << (f.map ? fmt(f.map->map[t]) : std::string());
    }
    os << ',' << (f.map ? fmt(f.map->average) : std::string()) << '\n';
  }
  os << "mean," << fmt(r.mean_frame.precision) << ',' << fmt(r.mean_frame.recall) << ','
     << fmt(r.mean_frame.f1) << ',' << fmt(r.mean_frame.mof);
  for (double v : r.mean_map) os << ',' << fmt(v);
  os << ',' << (r.mean_map_average ? fmt(*r.mean_map_average) : std::string()) << '\n';
  return os.str();
}

}  // namespace stepalign
