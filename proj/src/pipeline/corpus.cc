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

#include "stepalign/pipeline/corpus.h"

#include <utility>

#include "stepalign/error.h"
#include "stepalign/features/feature_io.h"

namespace stepalign {

namespace fs = std::filesystem;

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::kTrain:
      return "train";
    case Phase::kValidate:
      return "val";
    case Phase::kTest:
      return "test";
  }
  return "?";
}

Corpus Corpus::load(const fs::path& dir) {
  Corpus c;
  c.annotations_ = load_corpus(dir);
  for (const auto& v : c.annotations_.videos) {
    const fs::path f = dir / "features" / (v.video_id + ".fmtx");
    if (!fs::exists(f)) throw IoError("missing feature file: " + f.string());
    c.video_features_.emplace(v.video_id, read_features(f));
  }
  for (const auto& t : c.annotations_.texts) {
    const fs::path f = dir / "step_features" / (std::string(task_name(t.task)) + ".fmtx");
    if (!fs::exists(f)) throw IoError("missing step feature file: " + f.string());
    c.step_features_.emplace(t.task, read_features(f));
  }
  c.check();
  return c;
}

Corpus Corpus::from_synth(SynthCorpus synth) {
  Corpus c;
  c.annotations_ = std::move(synth.annotations);
  c.video_features_ = std::move(synth.video_features);
  c.step_features_ = std::move(synth.step_features);
  c.check();
  return c;
}

void Corpus::check() {
  if (annotations_.videos.empty()) throw ValidationError("corpus has no videos");
  dim_ = static_cast<int>(video_features_.begin()->second.dim());
  for (const auto& v : annotations_.videos) {
    auto it = video_features_.find(v.video_id);
    if (it == video_features_.end()) {
      throw ValidationError("corpus: no features for video " + v.video_id);
    }
    if (static_cast<int>(it->second.rows()) != v.num_frames) {
      throw ValidationError("corpus: " + v.video_id + " has " +
                            std::to_string(it->second.rows()) + " feature rows but " +
                            std::to_string(v.num_frames) + " annotated frames");
    }
    if (static_cast<int>(it->second.dim()) != dim_) {
      throw ValidationError("corpus: feature width of " + v.video_id + " differs");
    }
  }
  for (const auto& t : annotations_.texts) {
    auto it = step_features_.find(t.task);
    if (it == step_features_.end()) {
      throw ValidationError("corpus: no step features for task " +
                            std::string(task_name(t.task)));
    }
    if (static_cast<int>(it->second.rows()) != t.num_steps() ||
        static_cast<int>(it->second.dim()) != dim_) {
      throw ValidationError("corpus: step features of " + std::string(task_name(t.task)) +
                            " do not match its text");
    }
  }
}

EvalVideo Corpus::video(const std::string& video_id, int fold_id, Phase phase) const {
  const AnnotatedVideo& v = annotations_.video(video_id);
  record(fold_id, phase, video_id);
  return {&v, &video_features_.at(video_id), &step_features_.at(v.task)};
}

TrainingExample Corpus::training_example(const std::string& video_id, int fold_id) const {
  const EvalVideo v = video(video_id, fold_id, Phase::kTrain);
  return make_training_example(*v.annotation, *v.video, *v.step_text);
}

std::vector<AccessRecord> Corpus::access_log() const {
  std::lock_guard lock(log_->mu);
  return log_->records;
}

void Corpus::clear_access_log() const {
  std::lock_guard lock(log_->mu);
  log_->records.clear();
}

void Corpus::record(int fold_id, Phase phase, const std::string& video_id) const {
  std::lock_guard lock(log_->mu);
  log_->records.push_back({fold_id, phase, video_id});
}

}  // namespace stepalign
