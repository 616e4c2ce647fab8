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

#include "stepalign/model/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "stepalign/error.h"

namespace stepalign {

void validate(const TrainConfig& cfg) {
  if (!(cfg.loss.gamma > 0.0)) throw ValidationError("train config: gamma must be > 0");
  if (cfg.batch_size < 2) throw ValidationError("train config: batch_size must be >= 2");
  if (cfg.epochs < 0) throw ValidationError("train config: epochs must be >= 0");
  if (cfg.eval_every < 1) throw ValidationError("train config: eval_every must be >= 1");
  if (!(cfg.loss.drop_pct > 0.0 && cfg.loss.drop_pct <= 100.0)) {
    throw ValidationError("train config: drop percentile must be in (0, 100]");
  }
  if (cfg.loss.w_sup < 0.0 || cfg.loss.w_global < 0.0) {
    throw ValidationError("train config: loss weights must be >= 0");
  }
}

FrameMetrics evaluate_alignment(const ModelParams& params, std::span<const EvalVideo> videos,
                                const AlignOptions& opts) {
  std::vector<FrameMetrics> per_video;
  for (const auto& v : videos) {
    const AlignmentResult r = align_video(params, *v.video, *v.step_text, opts);
    per_video.push_back(frame_metrics(
        rasterize(r.segments, v.annotation->num_frames, RasterMode::kPrediction),
        rasterize_ground_truth(*v.annotation)));
  }
  return mean_frame_metrics(per_video);
}

TrainResult train_alignment(std::span<const TrainingExample> train,
                            std::span<const EvalVideo> val, const TrainConfig& cfg) {
  validate(cfg);
  if (train.size() < 2) throw ValidationError("train_alignment: needs at least 2 videos");
  for (const auto& ex : train) {
    if (ex.step_text->rows() > static_cast<std::size_t>(cfg.shape.num_queries)) {
      throw ValidationError("train_alignment: video " + ex.video_id + " has more steps than " +
                            std::to_string(cfg.shape.num_queries) + " queries");
    }
  }

  TrainResult out;
  ModelParams params = init_params(cfg.shape, cfg.seed, cfg.query_scale);
  Adam adam(cfg.adam, params.tensors());
  std::mt19937_64 rng(cfg.seed ^ 0x5eedba7c4ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  auto consider = [&](int epoch, EpochLog& log) {
    if (val.empty()) return;
    const double f1 = evaluate_alignment(params, val, cfg.align).f1;
    log.val_f1 = f1;
    if (epoch == 0 || f1 > out.best_val_f1) {
      out.best = params;
      out.best_epoch = epoch;
      out.best_val_f1 = f1;
    }
  };

  EpochLog init_log;
  consider(0, init_log);
  out.log.push_back(init_log);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> batches;  // [begin, end) into order
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      batches.emplace_back(i, std::min(order.size(), i + cfg.batch_size));
    }
    // A trailing single video cannot form global-loss negatives.
    if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
      batches.pop_back();
      batches.back().second = order.size();
    }

    EpochLog log;
    log.epoch = epoch;
    for (const auto& [begin, end] : batches) {
      std::vector<TrainingExample> batch;
      for (std::size_t i = begin; i < end; ++i) batch.push_back(train[order[i]]);
      const BatchForward fwd = forward_batch(params, batch, cfg.loss);
      Gradients g = backward(params, fwd, batch, cfg.loss);
      if (!std::isfinite(g.loss.total) || !g.grad.all_finite()) {
        std::string ids;
        for (const auto& ex : batch) ids += (ids.empty() ? "" : ", ") + ex.video_id;
        throw NumericalError("train_alignment: non-finite loss or gradient at epoch " +
                             std::to_string(epoch) + " (supervised " +
                             std::to_string(g.loss.supervised) + ", global " +
                             std::to_string(g.loss.global) + ") on videos " + ids);
      }
      const double w = static_cast<double>(end - begin) / static_cast<double>(train.size());
      log.train_loss += w * g.loss.total;
      log.supervised += w * g.loss.supervised;
      log.global += w * g.loss.global;
      adam.step(params.tensors(), g.grad.tensors());
      ++params.generation;
    }
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) consider(epoch, log);
    out.log.push_back(log);
  }

  out.last = params;
  if (val.empty()) {
    out.best = params;
    out.best_epoch = cfg.epochs;
  }
  return out;
}

}  // namespace stepalign
