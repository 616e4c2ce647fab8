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
#include <span>
#include <vector>

#include "stepalign/dataset/types.h"

namespace stepalign {

// Builds k cross-validation folds under the evaluation protocol:
//  * every val and every test set holds exactly one correct-intent and one
//    mistake-intent video per task;
//  * test sets of different folds are disjoint;
//  * no worker has videos on both sides of the train / (val + test)
//    boundary of a fold. Val and test may share workers.
// The worker groups behind each fold are found by exact search, so the
// result is deterministic for a given seed. Throws InfeasibleError when the
// corpus admits no such folds.
std::vector<FoldSpec> make_group_kfold(std::span<const AnnotatedVideo> videos, int k,
                                       std::uint64_t seed);

}  // namespace stepalign
