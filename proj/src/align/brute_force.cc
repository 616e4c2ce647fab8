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

#include <cmath>
#include <limits>

#include "stepalign/align/drop_dtw.h"
#include "stepalign/error.h"

namespace stepalign {

namespace {

constexpr std::size_t kMaxSlots = 4;
constexpr std::size_t kMaxItems = 7;

// Depth-first enumeration of every chain of cells. Each chain fixes the
// alignment: untouched items and slots are the dropped ones.
class ChainSearch {
 public:
  ChainSearch(const CostMatrix& cost, double di, std::optional<double> ds, ItemMatching items)
      : cost_(cost), di_(di), ds_(ds), exclusive_(items == ItemMatching::kExclusive) {}

  AlignmentPath run() {
    evaluate(0.0, 0, 0);
    for (int i = 0; i < static_cast<int>(cost_.n_slots()); ++i) {
      for (int j = 0; j < static_cast<int>(cost_.n_items()); ++j) {
        extend(i, j, 0.0, 0, 0);
      }
    }
    if (!found_) throw NumericalError("brute_force_align: no feasible alignment");
    AlignmentPath path;
    path.matches = best_chain_;
    path.total_cost = best_cost_;
    std::vector<char> item_used(cost_.n_items(), 0), slot_used(cost_.n_slots(), 0);
    for (const auto& [s, t] : best_chain_) {
      slot_used[s] = 1;
      item_used[t] = 1;
    }
    for (int t = 0; t < static_cast<int>(cost_.n_items()); ++t) {
      if (!item_used[t]) path.dropped_items.push_back(t);
    }
    for (int s = 0; s < static_cast<int>(cost_.n_slots()); ++s) {
      if (!slot_used[s]) path.dropped_slots.push_back(s);
    }
    return path;
  }

 private:
  // Appends cell (i, j); distinct_* count slots / items touched so far.
  void extend(int i, int j, double matched, int distinct_slots, int distinct_items) {
    const bool new_slot = chain_.empty() || i > chain_.back().first;
    const bool new_item = chain_.empty() || j > chain_.back().second;
    chain_.emplace_back(i, j);
    matched += cost_(i, j);
    distinct_slots += new_slot;
    distinct_items += new_item;
    evaluate(matched, distinct_slots, distinct_items);
    for (int ni = i; ni < static_cast<int>(cost_.n_slots()); ++ni) {
      for (int nj = exclusive_ ? j + 1 : j; nj < static_cast<int>(cost_.n_items()); ++nj) {
        if (ni == i && nj == j) continue;
        extend(ni, nj, matched, distinct_slots, distinct_items);
      }
    }
    chain_.pop_back();
  }

  void evaluate(double matched, int distinct_slots, int distinct_items) {
    const int slot_drops = static_cast<int>(cost_.n_slots()) - distinct_slots;
    if (slot_drops > 0 && !ds_) return;
    double total = matched + (static_cast<int>(cost_.n_items()) - distinct_items) * di_;
    if (slot_drops > 0) total += slot_drops * *ds_;
    if (!found_ || total < best_cost_ ||
        (total == best_cost_ && prefer(chain_, best_chain_))) {
      found_ = true;
      best_cost_ = total;
      best_chain_ = chain_;
    }
  }

  // Equal cost: more matches first, then lexicographically smaller chain.
  static bool prefer(const std::vector<std::pair<int, int>>& a,
                     const std::vector<std::pair<int, int>>& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  }

  const CostMatrix& cost_;
  double di_;
  std::optional<double> ds_;
  bool exclusive_;
  std::vector<std::pair<int, int>> chain_;
  std::vector<std::pair<int, int>> best_chain_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  bool found_ = false;
};

}  // namespace

AlignmentPath brute_force_align(const CostMatrix& cost, double drop_item_cost,
                                std::optional<double> drop_slot_cost, ItemMatching items) {
  if (cost.n_slots() > kMaxSlots || cost.n_items() > kMaxItems) {
    throw ValidationError("brute_force_align: instance exceeds 4 slots x 7 items");
  }
  if (!std::isfinite(drop_item_cost)) throw ValidationError("drop_item_cost must be finite");
  if (drop_slot_cost && !std::isfinite(*drop_slot_cost)) {
    throw ValidationError("drop_slot_cost must be finite when given");
  }
  return ChainSearch(cost, drop_item_cost, drop_slot_cost, items).run();
}

}  // namespace stepalign
