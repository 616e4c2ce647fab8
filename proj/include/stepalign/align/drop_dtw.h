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

// Monotone sequence alignment between "slots" (rows of a cost matrix) and
// "items" (columns).
//
// An alignment is a chain of matched cells (i, j), totally ordered in both
// coordinates, plus the sets of items and slots that no match touches.
// Untouched items are dropped at drop_item_cost each; untouched slots are
// dropped at drop_slot_cost each, or are forbidden when no slot drop cost is
// given (one-sided variant). A slot may match several items and an item
// several slots, as in plain DTW; the runs of one slot need not be
// contiguous when items in between are dropped.
//
// With ItemMatching::kExclusive an item matches at most one slot, so a
// slot's items never overlap the next slot's; this is the usual setting for
// localizing steps in frames.
//
// Tie-break: a match is preferred over a drop; among match predecessors the
// diagonal comes first, then the same slot (previous item), then the same
// item (previous slot); among drops an item drop precedes a slot drop.

#include <optional>

#include "stepalign/align/cost_matrix.h"

namespace stepalign {

enum class ItemMatching { kShared, kExclusive };

// Classic DTW over the full grid: steps (1,1), (0,1), (1,0), no drops.
AlignmentPath dtw(const CostMatrix& cost);

AlignmentPath drop_dtw(const CostMatrix& cost, double drop_item_cost,
                       std::optional<double> drop_slot_cost = std::nullopt,
                       ItemMatching items = ItemMatching::kShared);

// Exhaustive search over every chain of cells. Only for tests:
// n_slots <= 4 and n_items <= 7, otherwise ValidationError.
AlignmentPath brute_force_align(const CostMatrix& cost, double drop_item_cost,
                                std::optional<double> drop_slot_cost = std::nullopt,
                                ItemMatching items = ItemMatching::kShared);

// Re-derives the total cost of a path from its parts (matched costs in path
// order, then item drops, then slot drops).
double path_cost(const CostMatrix& cost, const AlignmentPath& path, double drop_item_cost,
                 std::optional<double> drop_slot_cost);

}  // namespace stepalign
