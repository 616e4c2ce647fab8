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

#include "stepalign/model/backward.h"

#include <cmath>
#include <string>

#include "stepalign/error.h"
#include "stepalign/model/losses.h"
#include "stepalign/simd/kernels.h"

namespace stepalign {

namespace {

int count_present(std::span<const TrainingExample> batch) {
  int n = 0;
  for (const auto& ex : batch) {
    for (const auto& p : ex.positives) n += !p.empty();
  }
  return n;
}

// Shared by batch_loss and backward so both see the same numbers.
LossValue evaluate(const BatchForward& fwd, std::span<const TrainingExample> batch,
                   const LossConfig& cfg, std::vector<Matrix>* g_slots,
                   std::vector<Matrix>* g_x, std::vector<Matrix>* g_texts) {
  if (fwd.videos.size() != batch.size()) throw ValidationError("forward/batch size mismatch");
  LossValue out;
  if (cfg.w_sup != 0.0) {
    const int n = count_present(batch);
    double sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& f = fwd.videos[b];
      for (std::size_t k = 0; k < batch[b].positives.size(); ++k) {
        const auto& pos = batch[b].positives[k];
        if (pos.empty()) continue;
        const int slot = fwd.slot_for_step[b][k];
        std::vector<double> gs;
        Matrix gx;
        const bool grad = g_slots != nullptr;
        if (grad) {
          gs.assign(f.slots.cols(), 0.0);
          gx = Matrix(f.x.rows(), f.x.cols());
        }
        sum += loss_supervised(f.slots.row(slot), pos, f.x, cfg.gamma,
                               grad ? std::span<double>(gs) : std::span<double>(),
                               grad ? &gx : nullptr);
        if (grad) {
          const double w = cfg.w_sup / n;
          simd::axpy(w, gs, (*g_slots)[b].row(slot));
          simd::axpy(w, gx.flat(), (*g_x)[b].flat());
        }
      }
    }
    out.supervised = n > 0 ? sum / n : 0.0;
  }
  if (cfg.w_global != 0.0) {
    std::vector<Matrix> sel;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      sel.push_back(gather_rows(fwd.videos[b].slots, fwd.slot_for_step[b]));
    }
    std::vector<Matrix> g_sel, g_t;
    if (g_slots != nullptr) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        g_sel.emplace_back(sel[b].rows(), sel[b].cols());
        g_t.emplace_back(fwd.texts[b].rows(), fwd.texts[b].cols());
      }
    }
    out.global = loss_global(sel, fwd.texts, cfg.gamma, g_slots ? &g_sel : nullptr,
                             g_slots ? &g_t : nullptr);
    if (g_slots != nullptr) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& steps = fwd.slot_for_step[b];
        for (std::size_t k = 0; k < steps.size(); ++k) {
          simd::axpy(cfg.w_global, g_sel[b].row(k), (*g_slots)[b].row(steps[k]));
        }
        simd::axpy(cfg.w_global, g_t[b].flat(), (*g_texts)[b].flat());
      }
    }
  }
  out.total = cfg.w_sup * out.supervised + cfg.w_global * out.global;
  return out;
}

}  // namespace

TrainingExample make_training_example(const AnnotatedVideo& annotation,
                                      const FeatureMatrix& video,
                                      const FeatureMatrix& step_text) {
  if (static_cast<int>(video.rows()) != annotation.num_frames) {
    throw ValidationError("video " + annotation.video_id + ": " +
                          std::to_string(video.rows()) + " feature rows for " +
                          std::to_string(annotation.num_frames) + " frames");
  }
  TrainingExample ex;
  ex.video_id = annotation.video_id;
  ex.video = &video;
  ex.step_text = &step_text;
  ex.positives.resize(step_text.rows());
  for (const auto& s : annotation.segments) {
    if (!s.step.is_defined()) continue;
    const int k = s.step.index() - 1;
    if (k >= static_cast<int>(step_text.rows())) {
      throw ValidationError("video " + annotation.video_id + ": unknown step " +
                            std::to_string(k + 1));
    }
    ex.positives[k].push_back(s.segment);
  }
  return ex;
}

BatchForward forward_batch(const ModelParams& params, std::span<const TrainingExample> batch,
                           const LossConfig& cfg,
                           const std::vector<std::vector<int>>* fixed_selection) {
  if (fixed_selection != nullptr && fixed_selection->size() != batch.size()) {
    throw ValidationError("forward_batch: fixed selection size mismatch");
  }
  BatchForward fwd;
  fwd.generation = params.generation;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    fwd.videos.push_back(forward_slots(params, *ex.video, cfg.normalize_input));
    fwd.text_inputs.push_back(normalize_input(ex.step_text->values(), cfg.normalize_input));
    fwd.texts.push_back(matmul(fwd.text_inputs.back(), params.proj_t));
    if (fixed_selection != nullptr) {
      fwd.slot_for_step.push_back((*fixed_selection)[b]);
    } else {
      fwd.slot_for_step.push_back(
          select_slots(fwd.videos.back().slots, fwd.texts.back(), cfg.drop_pct).slot_for_step);
    }
    if (fwd.slot_for_step.back().size() != ex.step_text->rows()) {
      throw ValidationError("forward_batch: selection does not cover every step");
    }
  }
  return fwd;
}

LossValue batch_loss(const BatchForward& fwd, std::span<const TrainingExample> batch,
                     const LossConfig& cfg) {
  return evaluate(fwd, batch, cfg, nullptr, nullptr, nullptr);
}

Gradients backward(const ModelParams& params, const BatchForward& fwd,
                   std::span<const TrainingExample> batch, const LossConfig& cfg) {
  if (fwd.generation != params.generation) {
    throw ValidationError("backward: stale forward cache (generation " +
                          std::to_string(fwd.generation) + ", parameters at " +
                          std::to_string(params.generation) + ")");
  }
  Gradients out;
  out.grad = zero_params(params.shape);
  const std::size_t B = batch.size();
  std::vector<Matrix> g_slots, g_x, g_texts;
  for (std::size_t b = 0; b < B; ++b) {
    g_slots.emplace_back(fwd.videos[b].slots.rows(), fwd.videos[b].slots.cols());
    g_x.emplace_back(fwd.videos[b].x.rows(), fwd.videos[b].x.cols());
    g_texts.emplace_back(fwd.texts[b].rows(), fwd.texts[b].cols());
  }
  out.loss = evaluate(fwd, batch, cfg, &g_slots, &g_x, &g_texts);

  ModelParams& g = out.grad;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(params.shape.d_prime));
  for (std::size_t b = 0; b < B; ++b) {
    const SlotForward& f = fwd.videos[b];
    // S = AV W_o
    gemm_tn_acc(f.av, g_slots[b], g.w_o);
    const Matrix g_av = matmul_nt(g_slots[b], params.w_o);
    // AV = A V
    Matrix g_attn = matmul_nt(g_av, f.v);
    const Matrix g_v = matmul_tn(f.attn, g_av);
    // Softmax rows, then the 1/sqrt(d') scale.
    for (std::size_t u = 0; u < g_attn.rows(); ++u) {
      const auto a = f.attn.row(u);
      auto ga = g_attn.row(u);
      const double inner = simd::dot(a, ga);
      for (std::size_t j = 0; j < ga.size(); ++j) ga[j] = a[j] * (ga[j] - inner) * inv_sqrt;
    }
    const Matrix& g_logits = g_attn;
    // logits = Qp K^T
    const Matrix g_q = matmul(g_logits, f.k);
    const Matrix g_k = matmul_tn(g_logits, f.q);
    // Qp = Q W_q, K = X W_k, V = X W_v
    gemm_tn_acc(params.queries, g_q, g.w_q);
    gemm_nt_acc(g_q, params.w_q, g.queries);
    gemm_tn_acc(f.x, g_k, g.w_k);
    gemm_tn_acc(f.x, g_v, g.w_v);
    Matrix& gx = g_x[b];
    gemm_nt_acc(g_k, params.w_k, gx);
    gemm_nt_acc(g_v, params.w_v, gx);
    // X = H P_v, T = H_t P_t
    gemm_tn_acc(f.inputs, gx, g.proj_v);
    gemm_tn_acc(fwd.text_inputs[b], g_texts[b], g.proj_t);
  }
  return out;
}

}  // namespace stepalign
