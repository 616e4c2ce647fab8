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

// Cross-validated experiment: per fold, train the alignment model and the
// mistake classifiers, then score the test videos under each arm.
//   full        aligned segments, classifier sees video and step text
//   oracle      ground-truth segments with their steps, same classifier
//   video_only  aligned segments, classifier trained and run with the text
//               half of its input zeroed
// Models are evaluated after rounding to float32, the checkpoint precision,
// so that an evaluation from saved checkpoints reproduces the same numbers.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stepalign/classifier/checkpoint.h"
#include "stepalign/classifier/train.h"
#include "stepalign/metrics/report.h"
#include "stepalign/model/checkpoint.h"
#include "stepalign/model/train.h"
#include "stepalign/pipeline/corpus.h"

namespace stepalign {

enum class Arm { kFull, kOracle, kVideoOnly };

inline constexpr Arm kAllArms[] = {Arm::kFull, Arm::kOracle, Arm::kVideoOnly};

// "full", "oracle", "video_only".
std::string_view arm_name(Arm a);
// Also accepts "video-only". Throws ValidationError otherwise.
Arm parse_arm(std::string_view name);

struct ExperimentConfig {
  int k = 5;
  // Seeds the fold split and, through fold_seeds, every training run.
  std::uint64_t seed = 0;
  TrainConfig align;
  ClassifierConfig classifier;
  std::vector<Arm> arms = {Arm::kFull, Arm::kOracle, Arm::kVideoOnly};
  // Parallel fold workers; 0 means one per hardware thread. Results do not
  // depend on it.
  int jobs = 0;
};

void validate(const ExperimentConfig& cfg);

// `jobs` is left out: it does not affect results.
nlohmann::json to_json(const ExperimentConfig& cfg);
// Keys: k, seed, arms, alignment {...}, classifier {...}.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             ExperimentConfig base = {});

struct FoldSeeds {
  int fold_id = 0;
  std::uint64_t alignment = 0;
  std::uint64_t classifier = 0;
};

FoldSeeds fold_seeds(std::uint64_t seed, int fold_id);

// Group k-fold over the corpus videos.
std::vector<FoldSpec> make_folds(const Corpus& corpus, int k, std::uint64_t seed);

// Runs body(0..n-1) on up to `jobs` threads (0: hardware concurrency). If
// any call throws, the exception of the lowest index is rethrown with
// "fold <i>: " prepended, keeping its type.
void for_each_fold(int n, int jobs, const std::function<void(int)>& body);

// Trained on fold.train, selected on fold.val; parameters rounded to float32.
ModelCheckpoint train_fold_alignment(const Corpus& corpus, const FoldSpec& fold,
                                     const ExperimentConfig& cfg);
ClassifierCheckpoint train_fold_classifier(const Corpus& corpus, const FoldSpec& fold,
                                           const ExperimentConfig& cfg, bool video_only);

struct FoldModels {
  int fold_id = 0;
  std::optional<ModelCheckpoint> alignment;     // full, video_only
  std::optional<ClassifierCheckpoint> text;     // full, oracle
  std::optional<ClassifierCheckpoint> video_only;
};

// Which models an arm needs.
bool arm_needs_alignment(Arm a);
bool arm_needs_text_classifier(Arm a);
bool arm_needs_video_only_classifier(Arm a);

struct VideoPrediction {
  std::string video_id;
  int fold_id = 0;
  int num_frames = 0;
  std::vector<AnnotatedSegment> ground_truth;
  // One per segment fed to the classifier.
  std::vector<Detection> detections;
};

struct ArmFoldResult {
  // For the oracle arm the frame metrics describe the ground-truth segments
  // it is given, so they are trivially perfect.
  FoldMetrics metrics;
  std::vector<VideoPrediction> videos;
};

// Throws ValidationError when `models` lacks what the arm needs.
ArmFoldResult evaluate_fold(const Corpus& corpus, const FoldSpec& fold, const FoldModels& models,
                            Arm arm, const AlignOptions& align);

struct ArmReport {
  MetricReport metrics;
  std::vector<VideoPrediction> videos;  // by fold, then test order
};

struct ExperimentReport {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<FoldSeeds> fold_seeds;
  std::map<Arm, ArmReport> arms;
};

// {arms: {name: {per_fold, mean, predictions}}, config, seeds}
nlohmann::json to_json(const ExperimentReport& r);
ExperimentReport experiment_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VideoPrediction& v);
VideoPrediction video_prediction_from_json(const nlohmann::json& j);

// Assembles a report from per-fold arm results (indexed like `folds`).
ExperimentReport make_experiment_report(const ExperimentConfig& cfg,
                                        const std::vector<FoldSpec>& folds,
                                        const std::map<Arm, std::vector<ArmFoldResult>>& results);

ExperimentReport run_experiment(const Corpus& corpus, const std::vector<FoldSpec>& folds,
                                const ExperimentConfig& cfg);

}  // namespace stepalign
