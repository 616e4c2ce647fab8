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

// Per-video alignment timeline: a ground-truth row above a predicted row,
// one rectangle per segment coloured by step. Mistake and correction
// segments are hatched; undefined ground-truth segments are grey.

#include <string>

#include "stepalign/pipeline/experiment.h"

namespace stepalign {

std::string timeline_svg(const VideoPrediction& video);

}  // namespace stepalign
