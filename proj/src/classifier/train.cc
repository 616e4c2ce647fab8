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

#include "stepalign/classifier/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stepalign/error.h"

namespace stepalign {

namespace {

std::span<const double> text_row(const FeatureMatrix& step_text, int step, bool video_only) {
  if (video_only || step == 0) return {};
  if (step < 1 || static_cast<std::size_t>(step) > step_text.rows()) {
    throw ValidationError("step " + std::to_string(step) + " has no text feature");
  }
  return step_text.row(step - 1);
}

std::vector<GroundTruthInstance> ground_truth_of(std::span<const EvalVideo> videos) {
  std::vector<GroundTruthInstance> gt;
  for (const auto& v : videos) {
    auto inst = ground_truth_instances(*v.annotation);
    gt.insert(gt.end(), inst.begin(), inst.end());
  }
  return gt;
}

bool has_scored_ground_truth(std::span<const GroundTruthInstance> gt) {
  return std::any_of(gt.begin(), gt.end(), [](const GroundTruthInstance& g) {
    return g.step.is_defined() && g.label != CoarseLabel::kCorrect;
  });
}

}  // namespace

void validate(const ClassifierConfig& cfg) {
  if (cfg.hidden < 1) throw ValidationError("classifier config: hidden must be >= 1");
  if (cfg.epochs < 0) throw ValidationError("classifier config: epochs must be >= 0");
  if (cfg.batch_size < 1) throw ValidationError("classifier config: batch_size must be >= 1");
  if (cfg.eval_every < 1) throw ValidationError("classifier config: eval_every must be >= 1");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) {
    throw ValidationError("classifier config: beta must be in [0, 1)");
  }
}

std::vector<SegmentSample> teacher_forced_samples(std::span<const EvalVideo> videos,
                                                  bool video_only) {
  std::vector<SegmentSample> out;
  for (const auto& v : videos) {
    for (const auto& s : v.annotation->segments) {
      SegmentSample smp;
      smp.video_id = v.annotation->video_id;
      smp.step = s.step.is_defined() ? s.step.index() : 0;
      smp.segment = s.segment;
      smp.label = coarse_label(s.mistake);
      smp.x = classifier_input(*v.video, s.segment, text_row(*v.step_text, smp.step, video_only));
      out.push_back(std::move(smp));
    }
  }
  return out;
}

ClassBalanceConfig class_balance(std::span<const SegmentSample> samples, double beta) {
  ClassBalanceConfig cfg;
  cfg.beta = beta;
  for (const auto& s : samples) {
    auto& c = cfg.counts[static_cast<int>(s.label)];
    c = c.value_or(0) + 1;
  }
  return cfg;
}

ClassifierTrainResult train_classifier(std::span<const EvalVideo> train,
                                       std::span<const EvalVideo> val,
                                       const ClassifierConfig& cfg) {
  validate(cfg);
  const std::vector<SegmentSample> samples = teacher_forced_samples(train, cfg.video_only);
  if (samples.empty()) throw ValidationError("train_classifier: no training segments");
  const ClassBalanceConfig balance = class_balance(samples, cfg.beta);
  for (CoarseLabel c : kAllCoarseLabels) cb_weight(balance, c);  // every class must be present

  const int dim = static_cast<int>(train.front().video->dim());
  ClassifierParams params = init_classifier(dim, cfg.hidden, cfg.seed);
  Adam adam(cfg.adam, params.tensors());
  std::mt19937_64 rng(cfg.seed ^ 0xc1a551f1e5ULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  const std::vector<GroundTruthInstance> val_gt = ground_truth_of(val);
  const std::vector<SegmentSample> val_samples = teacher_forced_samples(val, cfg.video_only);
  ClassifierTrainResult out;
  out.val_metric = has_scored_ground_truth(val_gt) ? "map" : "accuracy";

  auto consider = [&](int epoch) {
    if (val.empty()) return;
    double score = 0.0;
    if (out.val_metric == "map") {
      score = map_at_tiou(detect_on_ground_truth(params, val, cfg.video_only), val_gt).average;
    } else {
      int correct = 0;
      for (const auto& s : val_samples) correct += classify_input(params, s.x).label == s.label;
      score = val_samples.empty() ? 0.0 : static_cast<double>(correct) / val_samples.size();
    }
    out.val_log.emplace_back(epoch, score);
    if (epoch == 0 || score > out.best_val_score) {
      out.best = params;
      out.best_epoch = epoch;
      out.best_val_score = score;
    }
  };

  consider(0);
  const std::size_t width = samples.front().x.size();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      Matrix x(end - begin, width);
      std::vector<CoarseLabel> labels;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = samples[order[i]];
        std::copy(s.x.begin(), s.x.end(), x.row(i - begin).begin());
        labels.push_back(s.label);
      }
      ClassifierGradients g = classifier_backward(params, x, labels, balance);
      if (!std::isfinite(g.loss)) {
        throw NumericalError("train_classifier: non-finite loss at epoch " +
                             std::to_string(epoch));
      }
      epoch_loss += g.loss * static_cast<double>(end - begin) / order.size();
      adam.step(params.tensors(), g.grad.tensors());
    }
    out.train_loss.push_back(epoch_loss);
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) consider(epoch);
  }
  if (val.empty()) {
    out.best = params;
    out.best_epoch = cfg.epochs;
  }
  return out;
}

std::vector<Detection> detect_mistakes(const ClassifierParams& params,
                                       const std::string& video_id,
                                       std::span<const StepSegment> segments,
                                       const FeatureMatrix& video,
                                       const FeatureMatrix& step_text, bool video_only) {
  std::vector<Detection> out;
  for (const auto& s : segments) {
    const Classification c =
        classify(params, video, s.segment, text_row(step_text, s.step, video_only));
    out.push_back({video_id, s.step, s.segment, c.label, c.confidence});
  }
  return out;
}

std::vector<Detection> detect_on_ground_truth(const ClassifierParams& params,
                                              std::span<const EvalVideo> videos,
                                              bool video_only) {
  std::vector<Detection> out;
  for (const auto& v : videos) {
    std::vector<StepSegment> segs;
    for (const auto& s : v.annotation->segments) {
      if (s.step.is_defined()) segs.push_back({s.step.index(), s.segment});
    }
    auto d = detect_mistakes(params, v.annotation->video_id, segs, *v.video, *v.step_text,
                             video_only);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

}  // namespace stepalign
