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

// Synthetic feature corpus with planted ground truth.
//
// Each task gets K unit-norm step prototypes: orthonormal bases leaning by
// attribute_weight towards +a or -a on one shared attribute axis a. Steps of
// different tasks are paired on a common base with opposite signs. A video is a frame sequence of
// background gaps and step segments; step frames are the step prototype plus
// isotropic Gaussian noise. Order mistakes (skip, swap, split) and execution
// mistakes are injected into mistake-intent videos, and the annotations
// describe exactly what was emitted:
//   kind 1 (object)      frames of a different step of the same task
//   kind 4, 5            the step's prototype with its attribute sign
//                        flipped, which equals the correct prototype of its
//                        paired step in another task; only the step text
//                        reveals the mistake
//   kind 3 (correction)  the step is first done wrong (kind 5) and then
//                        redone in an extra segment of the same step, bent
//                        towards a corpus-wide correction signature
//   kind 2, 6            an extra short undefined segment after the step
// Step text features are the prototypes themselves.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stepalign/dataset/corpus_io.h"
#include "stepalign/features/feature_matrix.h"

namespace stepalign {

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct SynthConfig {
  int tasks = 5;
  int videos_per_task = 10;
  int workers = 4;
  int dim = 64;
  // Procedural text length per task, cycled when tasks > size().
  std::vector<int> steps_per_task = {8, 8, 9, 7, 14};
  IntRange frames_per_step{8, 14};
  IntRange background_gap{1, 2};
  IntRange extra_segment{2, 4};
  double noise_sigma = 0.05;
  double p_skip = 0.05;
  double p_swap = 0.05;
  double p_split = 0.1;
  double p_exec_mistake = 0.35;
  // Correct-intent videos use the probabilities above times this factor.
  double correct_run_mistake_scale = 0.0;
  // Relative frequency of execution-mistake kinds 1..6.
  std::array<double, 6> kind_weights = {0.1, 0.05, 0.1, 0.35, 0.35, 0.05};
  // Weight of the perturbation added to a prototype (cosine to the
  // prototype is about 1 / sqrt(1 + strength^2)).
  double perturb_strength = 0.75;
  // Background frames point away from the task's prototype mean, mixed with
  // a random direction at this weight.
  double background_mix = 0.3;
  // Lean of each prototype along the attribute axis, in [0, 1).
  double attribute_weight = 0.5;
  std::uint64_t seed = 0;
};

// Throws ValidationError for out-of-range probabilities, empty ranges etc.
void validate(const SynthConfig& cfg);

nlohmann::json to_json(const SynthConfig& cfg);
// Missing keys keep their defaults.
SynthConfig synth_config_from_json(const nlohmann::json& j);

// What was injected into one video.
struct SynthPlan {
  std::string video_id;
  std::vector<int> executed_order;  // 1-based steps in emission order
  std::vector<int> skipped;
  std::vector<std::pair<int, int>> swapped;
  std::vector<int> split;
  std::vector<std::pair<int, int>> exec_mistakes;  // (step, kind)
  int skip_trials = 0;
  int swap_trials = 0;
  int split_trials = 0;
  int exec_trials = 0;
};

struct SynthCorpus {
  AnnotationCorpus annotations;
  std::map<std::string, FeatureMatrix> video_features;
  std::map<TaskDomain, FeatureMatrix> step_features;
  std::vector<SynthPlan> plans;
};

SynthCorpus synth_corpus(const SynthConfig& cfg);

// Writes texts, annotations, features/<video>.fmtx, step_features/<task>.fmtx
// and plans.json under dir.
void save_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace stepalign
