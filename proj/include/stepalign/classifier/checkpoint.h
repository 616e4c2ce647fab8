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

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "stepalign/classifier/classifier.h"

namespace stepalign {

struct ClassifierCheckpoint {
  ClassifierParams params;
  std::uint64_t seed = 0;
  int epoch = 0;
  double val_score = 0.0;
  std::string val_metric;
  nlohmann::json settings = nlohmann::json::object();
};

// Same container as model checkpoints; tensors w1, b1, w2, b2.
void save_classifier_checkpoint(const std::filesystem::path& path,
                                const ClassifierCheckpoint& ckpt);
ClassifierCheckpoint load_classifier_checkpoint(const std::filesystem::path& path);

}  // namespace stepalign
