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

// A corpus held in memory: annotations, per-video features and per-task step
// features. Every per-video read goes through video() or training_example(),
// which record who asked, so tests can check that a fold's test videos are
// never read while its models are trained or selected.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "stepalign/dataset/corpus_io.h"
#include "stepalign/features/feature_matrix.h"
#include "stepalign/features/synth.h"
#include "stepalign/model/backward.h"
#include "stepalign/model/train.h"

namespace stepalign {

enum class Phase { kTrain, kValidate, kTest };

std::string_view phase_name(Phase p);

struct AccessRecord {
  int fold_id = 0;
  Phase phase = Phase::kTrain;
  std::string video_id;

  bool operator==(const AccessRecord&) const = default;
};

class Corpus {
 public:
  // Reads the layout written by save_synth_corpus: texts/, annotations/,
  // features/<video_id>.fmtx and step_features/<task>.fmtx. Feature widths
  // must agree with each other and frame counts with the annotations.
  static Corpus load(const std::filesystem::path& dir);
  static Corpus from_synth(SynthCorpus synth);

  const AnnotationCorpus& annotations() const { return annotations_; }
  int dim() const { return dim_; }

  // Throws ValidationError for an unknown id.
  EvalVideo video(const std::string& video_id, int fold_id, Phase phase) const;
  TrainingExample training_example(const std::string& video_id, int fold_id) const;

  std::vector<AccessRecord> access_log() const;
  void clear_access_log() const;

 private:
  Corpus() : log_(std::make_unique<Log>()) {}
  void check();
  void record(int fold_id, Phase phase, const std::string& video_id) const;

  struct Log {
    std::mutex mu;
    std::vector<AccessRecord> records;
  };

  AnnotationCorpus annotations_;
  std::map<std::string, FeatureMatrix> video_features_;
  std::map<TaskDomain, FeatureMatrix> step_features_;
  int dim_ = 0;
  std::unique_ptr<Log> log_;
};

}  // namespace stepalign
