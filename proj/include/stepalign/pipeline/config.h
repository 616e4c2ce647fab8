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

// JSON forms of the training configurations. Readers start from the
// defaults and override the keys that are present; unknown keys are an
// error so that typos in config files do not pass silently.

#include "json.hpp"
#include "stepalign/classifier/train.h"
#include "stepalign/model/train.h"

namespace stepalign {

nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const ClassifierConfig& c);

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
ClassifierConfig classifier_config_from_json(const nlohmann::json& j,
                                             ClassifierConfig base = {});

}  // namespace stepalign
