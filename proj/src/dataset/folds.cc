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

#include "stepalign/dataset/folds.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

#include "stepalign/error.h"

namespace stepalign {

namespace {

constexpr int kMaxWorkers = 20;
constexpr long kSearchBudget = 5'000'000;

// Videos of one (task, intent) cell, each tagged with its worker bit.
struct Cell {
  std::vector<int> video_idx;
  std::vector<int> worker;
};

// Kuhn's augmenting-path matching of folds onto distinct videos.
bool augment(int fold, const std::vector<std::vector<int>>& allowed,
             std::vector<int>& owner, std::vector<char>& seen) {
  for (int v : allowed[fold]) {
    if (seen[v]) continue;
    seen[v] = 1;
    if (owner[v] < 0 || augment(owner[v], allowed, owner, seen)) {
      owner[v] = fold;
      return true;
    }
  }
  return false;
}

// For each fold, the slot (index into cell.video_idx) of its test video, or
// an empty vector when no system of distinct representatives exists.
std::vector<int> assign_tests(const Cell& cell, const std::vector<unsigned>& masks,
                              std::mt19937_64& rng) {
  const int k = static_cast<int>(masks.size());
  std::vector<std::vector<int>> allowed(k);
  for (int f = 0; f < k; ++f) {
    for (int s = 0; s < static_cast<int>(cell.video_idx.size()); ++s) {
      if (masks[f] & (1u << cell.worker[s])) allowed[f].push_back(s);
    }
    std::shuffle(allowed[f].begin(), allowed[f].end(), rng);
  }
  std::vector<int> owner(cell.video_idx.size(), -1);
  for (int f = 0; f < k; ++f) {
    std::vector<char> seen(cell.video_idx.size(), 0);
    if (!augment(f, allowed, owner, seen)) return {};
  }
  std::vector<int> test(k, -1);
  for (int s = 0; s < static_cast<int>(owner.size()); ++s) {
    if (owner[s] >= 0) test[owner[s]] = s;
  }
  return test;
}

}  // namespace

std::vector<FoldSpec> make_group_kfold(std::span<const AnnotatedVideo> videos, int k,
                                       std::uint64_t seed) {
  if (k < 2) throw InfeasibleError("group k-fold needs k >= 2");
  if (videos.empty()) throw InfeasibleError("group k-fold on an empty corpus");

  std::map<std::string, int> worker_ids;
  for (const auto& v : videos) worker_ids.emplace(v.worker_id, 0);
  if (static_cast<int>(worker_ids.size()) > kMaxWorkers) {
    throw InfeasibleError("group k-fold supports at most " + std::to_string(kMaxWorkers) +
                          " workers");
  }
  {
    int i = 0;
    for (auto& [id, idx] : worker_ids) idx = i++;
  }
  const int num_workers = static_cast<int>(worker_ids.size());

  // cells[(task, intent)]
  std::map<std::pair<TaskDomain, RunIntent>, Cell> cells;
  std::set<TaskDomain> tasks;
  for (int i = 0; i < static_cast<int>(videos.size()); ++i) {
    const auto& v = videos[i];
    tasks.insert(v.task);
    auto& c = cells[{v.task, v.intent}];
    c.video_idx.push_back(i);
    c.worker.push_back(worker_ids.at(v.worker_id));
  }
  for (TaskDomain t : tasks) {
    for (RunIntent in : {RunIntent::kCorrectRun, RunIntent::kMistakeRun}) {
      auto it = cells.find({t, in});
      const int n = it == cells.end() ? 0 : static_cast<int>(it->second.video_idx.size());
      if (n < k) {
        throw InfeasibleError("task '" + std::string(task_name(t)) + "' has only " +
                              std::to_string(n) + " " + std::string(intent_name(in)) +
                              "-intent videos; " + std::to_string(k) +
                              " folds need at least " + std::to_string(k));
      }
    }
  }

  // A worker group is eligible when its videos fill exactly one val and one
  // test slot per (task, intent): two videos in every cell.
  std::vector<unsigned> eligible;
  const unsigned full = (1u << num_workers) - 1u;
  for (unsigned m = 1; m < full; ++m) {
    bool ok = true;
    for (const auto& [key, cell] : cells) {
      int n = 0;
      for (int w : cell.worker) n += (m >> w) & 1u;
      if (n != 2) {
        ok = false;
        break;
      }
    }
    if (ok) eligible.push_back(m);
  }
  if (eligible.empty()) {
    throw InfeasibleError(
        "no worker group holds exactly two correct and two mistake videos per task");
  }

  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);

  // Enumerate multisets of k eligible groups (nondecreasing index sequences)
  // until every cell admits distinct test videos.
  const int e = static_cast<int>(eligible.size());
  std::vector<int> pick(k, 0);
  long budget = kSearchBudget;
  while (true) {
    if (--budget < 0) {
      throw InfeasibleError("group k-fold search budget exhausted without a solution");
    }
    std::vector<unsigned> masks(k);
    for (int f = 0; f < k; ++f) masks[f] = eligible[pick[f]];

    std::mt19937_64 assign_rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::map<std::pair<TaskDomain, RunIntent>, std::vector<int>> tests;
    bool feasible = true;
    for (const auto& [key, cell] : cells) {
      auto t = assign_tests(cell, masks, assign_rng);
      if (t.empty()) {
        feasible = false;
        break;
      }
      tests[key] = std::move(t);
    }

    if (feasible) {
      std::vector<int> order(k);
      for (int f = 0; f < k; ++f) order[f] = f;
      std::shuffle(order.begin(), order.end(), assign_rng);

      std::vector<FoldSpec> folds;
      for (int fid = 0; fid < k; ++fid) {
        const int f = order[fid];
        FoldSpec spec;
        spec.fold_id = fid;
        std::set<int> test_set;
        for (const auto& [key, slots] : tests) {
          test_set.insert(cells.at(key).video_idx[slots[f]]);
        }
        for (int i = 0; i < static_cast<int>(videos.size()); ++i) {
          const bool in_group = (masks[f] >> worker_ids.at(videos[i].worker_id)) & 1u;
          if (!in_group) {
            spec.train.push_back(videos[i].video_id);
          } else if (test_set.count(i)) {
            spec.test.push_back(videos[i].video_id);
          } else {
            spec.val.push_back(videos[i].video_id);
          }
        }
        std::sort(spec.train.begin(), spec.train.end());
        std::sort(spec.val.begin(), spec.val.end());
        std::sort(spec.test.begin(), spec.test.end());
        folds.push_back(std::move(spec));
      }
      return folds;
    }

    // Next nondecreasing sequence.
    int pos = k - 1;
    while (pos >= 0 && pick[pos] == e - 1) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int f = pos + 1; f < k; ++f) pick[f] = pick[pos];
  }
  throw InfeasibleError("no assignment of worker groups yields " + std::to_string(k) +
                        " folds with disjoint test sets");
}

}  // namespace stepalign
