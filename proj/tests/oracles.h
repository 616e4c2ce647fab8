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

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Nothing here calls the code under test except to build
// inputs or to evaluate the objective being differentiated.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "stepalign/classifier/classifier.h"
#include "stepalign/metrics/map.h"
#include "stepalign/model/backward.h"
#include "stepalign/model/forward.h"
#include "stepalign/model/params.h"
#include "stepalign/simd/matrix.h"

namespace stepalign::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& x : m.flat()) x = u(rng);
  return m;
}

// ---- mAP ----

inline GroundTruthInstance gt(std::string video, int step, Segment s, CoarseLabel c) {
  return {std::move(video), StepRef::defined(step), s, c};
}

inline Detection det(std::string video, int step, Segment s, CoarseLabel c, double conf) {
  return {std::move(video), step, s, c, conf};
}

inline double oracle_tiou(const Segment& a, const Segment& b) {
  const int inter = std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const int uni = (a.end - a.start) + (b.end - b.start) - inter;
  return static_cast<double>(inter) / uni;
}

// Pointwise AP: rank, match greedily, then average over true positives the
// best precision reached at that rank or any later one. NaN without GT.
inline double brute_force_ap(std::vector<Detection> d, const std::vector<GroundTruthInstance>& g,
                             CoarseLabel cls, double thr) {
  std::erase_if(d, [&](const Detection& x) { return x.label != cls; });
  std::stable_sort(d.begin(), d.end(), [](const Detection& a, const Detection& b) {
    return std::tie(b.confidence, a.video_id, a.step, a.segment.start) <
           std::tie(a.confidence, b.video_id, b.step, b.segment.start);
  });
  int n_gt = 0;
  for (const auto& x : g) n_gt += x.label == cls && x.step.is_defined();
  if (n_gt == 0) return std::nan("");
  std::vector<char> used(g.size(), 0), tp(d.size(), 0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (used[i] || g[i].label != cls || !g[i].step.is_defined()) continue;
      if (g[i].video_id != d[k].video_id || g[i].step.index() != d[k].step) continue;
      const double t = oracle_tiou(g[i].segment, d[k].segment);
      if (t >= thr && t > best_iou) {
        best_iou = t;
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      used[best] = 1;
      tp[k] = 1;
    }
  }
  double ap = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!tp[k]) continue;
    double best_prec = 0.0;
    for (std::size_t k2 = k; k2 < d.size(); ++k2) {
      int hits = 0;
      for (std::size_t q = 0; q <= k2; ++q) hits += tp[q];
      best_prec = std::max(best_prec, static_cast<double>(hits) / (k2 + 1));
    }
    ap += best_prec;
  }
  return ap / n_gt;
}

struct MapCase {
  std::vector<GroundTruthInstance> gt;
  std::vector<Detection> det;
};

// Two videos, three steps, at least one mistake or correction instance.
inline MapCase random_map_case(std::mt19937_64& rng) {
  const std::vector<CoarseLabel> labels = {CoarseLabel::kCorrect, CoarseLabel::kMistake,
                                           CoarseLabel::kCorrection};
  std::uniform_int_distribution<int> pick_label(0, 2), pick_step(1, 3), pick_video(0, 1);
  std::uniform_int_distribution<int> start(0, 15), len(1, 8);
  MapCase c;
  while (true) {
    c.gt.clear();
    c.det.clear();
    const int n_gt = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int i = 0; i < n_gt; ++i) {
      const int s = start(rng);
      c.gt.push_back(gt(pick_video(rng) ? "b" : "a", pick_step(rng), {s, s + len(rng)},
                        labels[pick_label(rng)]));
    }
    if (std::any_of(c.gt.begin(), c.gt.end(),
                    [](const auto& x) { return x.label != CoarseLabel::kCorrect; })) {
      break;
    }
  }
  const int n_det = std::uniform_int_distribution<int>(0, 8)(rng);
  for (int i = 0; i < n_det; ++i) {
    const int s = start(rng);
    // Coarse confidences so that ties occur.
    const double conf = std::uniform_int_distribution<int>(1, 4)(rng) / 4.0;
    c.det.push_back(det(pick_video(rng) ? "b" : "a", pick_step(rng), {s, s + len(rng)},
                        labels[pick_label(rng)], conf));
  }
  return c;
}

// mAP per threshold from brute_force_ap, averaged over the scored classes.
inline std::vector<double> brute_force_map(const MapCase& c, const std::vector<double>& thr) {
  std::vector<double> out;
  for (double t : thr) {
    double sum = 0.0;
    int classes = 0;
    for (CoarseLabel cls : {CoarseLabel::kMistake, CoarseLabel::kCorrection}) {
      const double ap = brute_force_ap(c.det, c.gt, cls, t);
      if (std::isnan(ap)) continue;
      sum += ap;
      ++classes;
    }
    out.push_back(sum / classes);
  }
  return out;
}

// ---- finite differences ----

// Relative error ||a - n|| / max(||a|| + ||n||, floor) over one tensor.
inline double relative_error(const Matrix& analytic, const Matrix& numeric, double floor) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    diff += std::pow(numeric.flat()[i] - analytic.flat()[i], 2);
    scale += std::pow(numeric.flat()[i], 2) + std::pow(analytic.flat()[i], 2);
  }
  return std::sqrt(diff) / std::max(std::sqrt(scale), floor);
}

// Central differences of `objective` with respect to every entry of `t`.
template <class F>
Matrix central_differences(Matrix& t, F&& objective, double h = 1e-5) {
  Matrix numeric(t.rows(), t.cols());
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    double& x = t.flat()[i];
    const double x0 = x;
    x = x0 + h;
    const double up = objective();
    x = x0 - h;
    const double down = objective();
    x = x0;
    numeric.flat()[i] = (up - down) / (2.0 * h);
  }
  return numeric;
}

inline ModelParams random_params(const ModelShape& shape, std::mt19937_64& rng) {
  ModelParams p = zero_params(shape);
  for (Matrix* t : p.tensors()) *t = random_matrix(t->rows(), t->cols(), rng);
  return p;
}

// A random batch together with the feature storage it points into.
struct RandomBatch {
  std::vector<std::unique_ptr<FeatureMatrix>> storage;
  std::vector<TrainingExample> examples;
};

inline RandomBatch random_batch(const ModelShape& shape, std::mt19937_64& rng) {
  RandomBatch b;
  const int B = std::uniform_int_distribution<int>(2, 3)(rng);
  for (int i = 0; i < B; ++i) {
    const int L = std::uniform_int_distribution<int>(4, 8)(rng);
    const int K = std::uniform_int_distribution<int>(1, std::min(3, shape.num_queries))(rng);
    b.storage.push_back(std::make_unique<FeatureMatrix>(random_matrix(L, shape.dim, rng)));
    b.storage.push_back(std::make_unique<FeatureMatrix>(random_matrix(K, shape.dim, rng)));
    TrainingExample ex;
    ex.video_id = "v" + std::to_string(i);
    ex.video = b.storage[b.storage.size() - 2].get();
    ex.step_text = b.storage.back().get();
    ex.positives.resize(K);
    for (int k = 0; k < K; ++k) {
      if (k > 0 && std::bernoulli_distribution(0.3)(rng)) continue;  // step absent
      const int s = std::uniform_int_distribution<int>(0, L - 1)(rng);
      const int e = std::uniform_int_distribution<int>(s + 1, L)(rng);
      ex.positives[k].push_back({s, e});
      if (e + 1 < L && std::bernoulli_distribution(0.3)(rng)) ex.positives[k].push_back({e + 1, L});
    }
    b.examples.push_back(std::move(ex));
  }
  return b;
}

struct GradientCheck {
  double loss_mismatch = 0.0;  // |objective(p) - reported loss|
  std::vector<double> tensor_errors;
  double max_error() const {
    return *std::max_element(tensor_errors.begin(), tensor_errors.end());
  }
};

// Draws configuration `config` of the alignment model and compares backward()
// against central differences of the total loss with the slot selection held
// fixed. Alternates gamma, the global weight and input normalization.
inline GradientCheck check_model_gradients(int config, std::mt19937_64& rng) {
  const ModelShape shape{std::uniform_int_distribution<int>(2, 5)(rng),
                         std::uniform_int_distribution<int>(2, 4)(rng),
                         std::uniform_int_distribution<int>(3, 5)(rng)};
  ModelParams p = random_params(shape, rng);
  for (Matrix* t : p.tensors()) {
    for (double& x : t->flat()) x *= 0.7;
  }
  const RandomBatch batch = random_batch(shape, rng);
  LossConfig cfg;
  cfg.gamma = config % 2 == 0 ? 0.03 : 0.5;
  cfg.w_sup = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
  cfg.w_global = config % 3 == 0 ? 0.0 : std::uniform_real_distribution<double>(0.2, 1.0)(rng);
  cfg.normalize_input = config % 4 != 1;

  const BatchForward fwd = forward_batch(p, batch.examples, cfg);
  const Gradients g = backward(p, fwd, batch.examples, cfg);
  const auto selection = fwd.slot_for_step;
  auto objective = [&] {
    return batch_loss(forward_batch(p, batch.examples, cfg, &selection), batch.examples, cfg)
        .total;
  };
  GradientCheck out;
  out.loss_mismatch = std::abs(objective() - g.loss.total);
  const auto analytic = g.grad.tensors();
  const auto tensors = p.tensors();
  for (int ti = 0; ti < kNumModelTensors; ++ti) {
    out.tensor_errors.push_back(
        relative_error(*analytic[ti], central_differences(*tensors[ti], objective), 1e-8));
  }
  return out;
}

// Same for the classifier on a random batch; errors are the worst entrywise
// relative error per tensor.
inline GradientCheck check_classifier_gradients(std::mt19937_64& rng) {
  const int d = std::uniform_int_distribution<int>(1, 4)(rng);
  const int hidden = std::uniform_int_distribution<int>(2, 6)(rng);
  ClassifierParams p = zero_classifier(d, hidden);
  for (Matrix* t : p.tensors()) *t = random_matrix(t->rows(), t->cols(), rng);
  const int B = std::uniform_int_distribution<int>(1, 6)(rng);
  const Matrix x = random_matrix(B, 2 * d, rng);
  std::vector<CoarseLabel> labels(B);
  for (auto& l : labels) l = kAllCoarseLabels[std::uniform_int_distribution<int>(0, 2)(rng)];
  ClassBalanceConfig cfg;
  cfg.counts = {std::uniform_int_distribution<long>(1, 50)(rng), 2, 3};

  const ClassifierGradients g = classifier_backward(p, x, labels, cfg);
  auto objective = [&] { return classifier_backward(p, x, labels, cfg).loss; };
  GradientCheck out;
  out.loss_mismatch = std::abs(objective() - g.loss);
  const auto analytic = g.grad.tensors();
  const auto tensors = p.tensors();
  for (int ti = 0; ti < static_cast<int>(kClassifierTensorNames.size()); ++ti) {
    const Matrix numeric = central_differences(*tensors[ti], objective);
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double fd = numeric.flat()[i], an = analytic[ti]->flat()[i];
      // ReLU kinks are measure-zero for random weights.
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-7));
    }
    out.tensor_errors.push_back(worst);
  }
  return out;
}

}  // namespace stepalign::testing
