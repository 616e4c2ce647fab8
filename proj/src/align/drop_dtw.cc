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

#include "stepalign/align/drop_dtw.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "stepalign/error.h"

namespace stepalign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (S+1) x (N+1) table.
template <typename T>
class Table {
 public:
  Table(std::size_t rows, std::size_t cols, T fill)
      : cols_(cols), data_(rows * cols, fill) {}
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  T operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t cols_;
  std::vector<T> data_;
};

void finish(AlignmentPath& path) {
  std::reverse(path.matches.begin(), path.matches.end());
  std::sort(path.dropped_items.begin(), path.dropped_items.end());
  std::sort(path.dropped_slots.begin(), path.dropped_slots.end());
}

}  // namespace

AlignmentPath dtw(const CostMatrix& cost) {
  const std::size_t S = cost.n_slots();
  const std::size_t N = cost.n_items();
  Table<double> d(S + 1, N + 1, kInf);
  // 0 = diagonal, 1 = same slot (previous item), 2 = same item (previous slot)
  Table<std::uint8_t> from(S + 1, N + 1, 0);
  d(0, 0) = 0.0;
  for (std::size_t i = 1; i <= S; ++i) {
    for (std::size_t j = 1; j <= N; ++j) {
      double best = d(i - 1, j - 1);
      std::uint8_t arg = 0;
      if (d(i, j - 1) < best) {
        best = d(i, j - 1);
        arg = 1;
      }
      if (d(i - 1, j) < best) {
        best = d(i - 1, j);
        arg = 2;
      }
      d(i, j) = best + cost(i - 1, j - 1);
      from(i, j) = arg;
    }
  }
  AlignmentPath path;
  path.total_cost = d(S, N);
  std::size_t i = S, j = N;
  while (i > 0 && j > 0) {
    path.matches.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
    switch (from(i, j)) {
      case 0: --i; --j; break;
      case 1: --j; break;
      default: --i; break;
    }
  }
  finish(path);
  return path;
}

AlignmentPath drop_dtw(const CostMatrix& cost, double drop_item_cost,
                       std::optional<double> drop_slot_cost, ItemMatching items) {
  if (!std::isfinite(drop_item_cost)) throw ValidationError("drop_item_cost must be finite");
  if (drop_slot_cost && !std::isfinite(*drop_slot_cost)) {
    throw ValidationError("drop_slot_cost must be finite when given");
  }
  const std::size_t S = cost.n_slots();
  const std::size_t N = cost.n_items();
  const double di = drop_item_cost;
  const double ds = drop_slot_cost.value_or(kInf);

  // full(i, j): best over every configuration of the prefix (i slots, j items).
  // match(i, j): chain ends with the match (i-1, j-1).
  // slot_open(i, j): slot i-1 matched, trailing items dropped.
  // item_open(i, j): item j-1 matched, trailing slots dropped.
  Table<double> full(S + 1, N + 1, kInf), match(S + 1, N + 1, kInf);
  Table<double> slot_open(S + 1, N + 1, kInf), item_open(S + 1, N + 1, kInf);
  // Decisions: full 0=match 1=drop item 2=drop slot; match 0=diag 1=slot 2=item;
  // slot_open/item_open 0=match 1=drop.
  Table<std::uint8_t> full_from(S + 1, N + 1, 0), match_from(S + 1, N + 1, 0);
  Table<std::uint8_t> slot_from(S + 1, N + 1, 0), item_from(S + 1, N + 1, 0);

  full(0, 0) = 0.0;
  for (std::size_t j = 1; j <= N; ++j) {
    full(0, j) = full(0, j - 1) + di;
    full_from(0, j) = 1;
  }
  for (std::size_t i = 1; i <= S; ++i) {
    full(i, 0) = drop_slot_cost ? full(i - 1, 0) + ds : kInf;
    full_from(i, 0) = 2;
  }

  for (std::size_t i = 1; i <= S; ++i) {
    for (std::size_t j = 1; j <= N; ++j) {
      double pre = full(i - 1, j - 1);
      std::uint8_t arg = 0;
      if (slot_open(i, j - 1) < pre) {
        pre = slot_open(i, j - 1);
        arg = 1;
      }
      if (items == ItemMatching::kShared && item_open(i - 1, j) < pre) {
        pre = item_open(i - 1, j);
        arg = 2;
      }
      const double m = pre + cost(i - 1, j - 1);
      match(i, j) = m;
      match_from(i, j) = arg;

      const double s_drop = slot_open(i, j - 1) + di;
      slot_open(i, j) = m <= s_drop ? m : s_drop;
      slot_from(i, j) = m <= s_drop ? 0 : 1;

      const double t_drop = item_open(i - 1, j) + ds;
      item_open(i, j) = m <= t_drop ? m : t_drop;
      item_from(i, j) = m <= t_drop ? 0 : 1;

      double best = m;
      std::uint8_t farg = 0;
      const double drop_item = full(i, j - 1) + di;
      if (drop_item < best) {
        best = drop_item;
        farg = 1;
      }
      const double drop_slot = full(i - 1, j) + ds;
      if (drop_slot < best) {
        best = drop_slot;
        farg = 2;
      }
      full(i, j) = best;
      full_from(i, j) = farg;
    }
  }

  AlignmentPath path;
  path.total_cost = full(S, N);
  if (!std::isfinite(path.total_cost)) {
    throw NumericalError("drop_dtw: no feasible alignment");
  }

  enum class State { kFull, kMatch, kSlotOpen, kItemOpen };
  State st = State::kFull;
  std::size_t i = S, j = N;
  while (i > 0 || j > 0) {
    switch (st) {
      case State::kFull:
        if (i == 0 || (j > 0 && full_from(i, j) == 1)) {
          path.dropped_items.push_back(static_cast<int>(j - 1));
          --j;
        } else if (j == 0 || full_from(i, j) == 2) {
          path.dropped_slots.push_back(static_cast<int>(i - 1));
          --i;
        } else {
          st = State::kMatch;
        }
        break;
      case State::kMatch:
        path.matches.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
        switch (match_from(i, j)) {
          case 0: st = State::kFull; --i; --j; break;
          case 1: st = State::kSlotOpen; --j; break;
          default: st = State::kItemOpen; --i; break;
        }
        break;
      case State::kSlotOpen:
        if (slot_from(i, j) == 0) {
          st = State::kMatch;
        } else {
          path.dropped_items.push_back(static_cast<int>(j - 1));
          --j;
        }
        break;
      case State::kItemOpen:
        if (item_from(i, j) == 0) {
          st = State::kMatch;
        } else {
          path.dropped_slots.push_back(static_cast<int>(i - 1));
          --i;
        }
        break;
    }
  }
  finish(path);
  return path;
}

double path_cost(const CostMatrix& cost, const AlignmentPath& path, double drop_item_cost,
                 std::optional<double> drop_slot_cost) {
  double total = 0.0;
  for (const auto& [s, t] : path.matches) total += cost(s, t);
  total += static_cast<double>(path.dropped_items.size()) * drop_item_cost;
  if (!path.dropped_slots.empty()) {
    if (!drop_slot_cost) throw ValidationError("path drops slots in the one-sided variant");
    total += static_cast<double>(path.dropped_slots.size()) * *drop_slot_cost;
  }
  return total;
}

}  // namespace stepalign
