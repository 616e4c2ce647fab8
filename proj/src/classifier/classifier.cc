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

#include "stepalign/classifier/classifier.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "stepalign/error.h"
#include "stepalign/features/vector_ops.h"
#include "stepalign/simd/kernels.h"

namespace stepalign {

std::array<Matrix*, 4> ClassifierParams::tensors() { return {&w1, &b1, &w2, &b2}; }
std::array<const Matrix*, 4> ClassifierParams::tensors() const { return {&w1, &b1, &w2, &b2}; }

ClassifierParams zero_classifier(int dim, int hidden) {
  if (dim < 1 || hidden < 1) throw ValidationError("classifier: dim and hidden must be >= 1");
  ClassifierParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.w1 = Matrix(2 * dim, hidden);
  p.b1 = Matrix(1, hidden);
  p.w2 = Matrix(hidden, kNumCoarseLabels);
  p.b2 = Matrix(1, kNumCoarseLabels);
  return p;
}

ClassifierParams init_classifier(int dim, int hidden, std::uint64_t seed) {
  ClassifierParams p = zero_classifier(dim, hidden);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s1 = std::sqrt(2.0 / (2.0 * dim));
  const double s2 = std::sqrt(2.0 / hidden);
  for (double& x : p.w1.flat()) x = s1 * normal(rng);
  for (double& x : p.w2.flat()) x = s2 * normal(rng);
  return p;
}

CoarseLabel argmax_label(const Logits& z) {
  int best = 0;
  for (int c = 1; c < kNumCoarseLabels; ++c) {
    if (z[c] > z[best]) best = c;
  }
  return static_cast<CoarseLabel>(best);
}

Logits softmax(const Logits& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  Logits p{};
  double sum = 0.0;
  for (int c = 0; c < kNumCoarseLabels; ++c) {
    p[c] = std::exp(z[c] - mx);
    sum += p[c];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> classifier_input(const FeatureMatrix& video, const Segment& seg,
                                     std::span<const double> step_feature) {
  std::vector<double> x = mean_pool(video, seg);
  const std::size_t d = x.size();
  if (!step_feature.empty() && step_feature.size() != d) {
    throw ValidationError("classifier_input: step feature dim " +
                          std::to_string(step_feature.size()) + " != video dim " +
                          std::to_string(d));
  }
  x.resize(2 * d, 0.0);
  std::copy(step_feature.begin(), step_feature.end(), x.begin() + d);
  return x;
}

Classification classify_input(const ClassifierParams& params, std::span<const double> x) {
  if (x.size() != params.w1.rows()) {
    throw ValidationError("classify: input width " + std::to_string(x.size()) + " != " +
                          std::to_string(params.w1.rows()));
  }
  std::vector<double> h(params.b1.flat().begin(), params.b1.flat().end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) simd::axpy(x[i], params.w1.row(i), h);
  }
  Classification out;
  for (int c = 0; c < kNumCoarseLabels; ++c) out.logits[c] = params.b2(0, c);
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double a = std::max(0.0, h[j]);
    if (a == 0.0) continue;
    for (int c = 0; c < kNumCoarseLabels; ++c) out.logits[c] += a * params.w2(j, c);
  }
  out.probs = softmax(out.logits);
  out.label = argmax_label(out.logits);
  out.confidence = out.probs[static_cast<int>(out.label)];
  return out;
}

Classification classify(const ClassifierParams& params, const FeatureMatrix& video,
                        const Segment& seg, std::span<const double> step_feature) {
  if (video.dim() != static_cast<std::size_t>(params.dim)) {
    throw ValidationError("classify: video dim " + std::to_string(video.dim()) +
                          " != classifier dim " + std::to_string(params.dim));
  }
  return classify_input(params, classifier_input(video, seg, step_feature));
}

double cb_weight(const ClassBalanceConfig& cfg, CoarseLabel label) {
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) throw ValidationError("cb_weight: beta in [0, 1)");
  const auto& r = cfg.counts[static_cast<int>(label)];
  if (!r || *r < 1) {
    throw ValidationError("cb_weight: no training samples of class '" +
                          std::string(coarse_name(label)) +
                          "'; merge folds or regenerate the corpus with more mistakes");
  }
  return (1.0 - cfg.beta) / (1.0 - std::pow(cfg.beta, static_cast<double>(*r)));
}

double loss_cb(const Logits& z, CoarseLabel label, const ClassBalanceConfig& cfg,
               std::span<double> grad) {
  const double w = cb_weight(cfg, label);
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  const int y = static_cast<int>(label);
  if (!grad.empty()) {
    for (int c = 0; c < kNumCoarseLabels; ++c) {
      grad[c] += w * (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0));
    }
  }
  return w * (lse - z[y]);
}

ClassifierGradients classifier_backward(const ClassifierParams& params, const Matrix& x,
                                        std::span<const CoarseLabel> labels,
                                        const ClassBalanceConfig& cfg) {
  const std::size_t B = x.rows();
  if (B == 0 || labels.size() != B) throw ValidationError("classifier_backward: bad batch");
  if (x.cols() != params.w1.rows()) throw ValidationError("classifier_backward: input width");
  const std::size_t H = params.hidden;

  Matrix pre(B, H);
  for (std::size_t b = 0; b < B; ++b) {
    std::copy(params.b1.flat().begin(), params.b1.flat().end(), pre.row(b).begin());
  }
  gemm_nn_acc(x, params.w1, pre);
  Matrix act = pre;
  for (double& v : act.flat()) v = std::max(0.0, v);
  Matrix z(B, kNumCoarseLabels);
  for (std::size_t b = 0; b < B; ++b) {
    for (int c = 0; c < kNumCoarseLabels; ++c) z(b, c) = params.b2(0, c);
  }
  gemm_nn_acc(act, params.w2, z);

  ClassifierGradients out;
  out.grad = zero_classifier(params.dim, params.hidden);
  Matrix gz(B, kNumCoarseLabels);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t b = 0; b < B; ++b) {
    Logits zl{};
    for (int c = 0; c < kNumCoarseLabels; ++c) zl[c] = z(b, c);
    out.loss += loss_cb(zl, labels[b], cfg, gz.row(b)) * inv_b;
  }
  for (double& g : gz.flat()) g *= inv_b;

  ClassifierParams& g = out.grad;
  gemm_tn_acc(act, gz, g.w2);
  for (std::size_t b = 0; b < B; ++b) simd::add(gz.row(b), g.b2.row(0));
  Matrix gh = matmul_nt(gz, params.w2);
  for (std::size_t i = 0; i < gh.size(); ++i) {
    if (pre.flat()[i] <= 0.0) gh.flat()[i] = 0.0;
  }
  gemm_tn_acc(x, gh, g.w1);
  for (std::size_t b = 0; b < B; ++b) simd::add(gh.row(b), g.b1.row(0));
  return out;
}

}  // namespace stepalign
