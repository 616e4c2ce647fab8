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

// Mistake classifier over segments: the mean frame feature of a segment is
// concatenated with the step text feature and fed to a two-layer
// perceptron with ReLU that scores the three coarse labels.
//
//   z = relu(x W1 + b1) W2 + b2,   x = [mean_pool(video, seg), step_feature]

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stepalign/dataset/types.h"
#include "stepalign/features/feature_matrix.h"
#include "stepalign/simd/matrix.h"

namespace stepalign {

inline constexpr std::array<std::string_view, 4> kClassifierTensorNames = {"w1", "b1", "w2",
                                                                           "b2"};

struct ClassifierParams {
  int dim = 0;      // d; the input is 2d wide
  int hidden = 256;
  Matrix w1;  // 2d x h
  Matrix b1;  // 1 x h
  Matrix w2;  // h x 3
  Matrix b2;  // 1 x 3

  std::array<Matrix*, 4> tensors();
  std::array<const Matrix*, 4> tensors() const;
};

ClassifierParams zero_classifier(int dim, int hidden);
// He-scaled Gaussian weights, zero biases.
ClassifierParams init_classifier(int dim, int hidden, std::uint64_t seed);

using Logits = std::array<double, kNumCoarseLabels>;

struct Classification {
  Logits logits{};
  Logits probs{};  // softmax(logits)
  CoarseLabel label = CoarseLabel::kCorrect;
  double confidence = 0.0;  // probs[label]
};

// Argmax with ties going to the lowest class index.
CoarseLabel argmax_label(const Logits& z);
Logits softmax(const Logits& z);

// [mean_pool(video, seg), step_feature]; an empty step_feature stands for the
// zero vector (undefined steps, video-only inputs).
std::vector<double> classifier_input(const FeatureMatrix& video, const Segment& seg,
                                     std::span<const double> step_feature);

Classification classify_input(const ClassifierParams& params, std::span<const double> x);
Classification classify(const ClassifierParams& params, const FeatureMatrix& video,
                        const Segment& seg, std::span<const double> step_feature);

// beta in [0, 1); counts[c] is the number of training samples of class c.
struct ClassBalanceConfig {
  double beta = 0.9999;
  std::array<std::optional<long>, kNumCoarseLabels> counts{};
};

// (1 - beta) / (1 - beta^r) with r = counts[label]. Missing or zero count
// -> ValidationError.
double cb_weight(const ClassBalanceConfig& cfg, CoarseLabel label);

// cb_weight * -log softmax(z)[label]; adds weight * (softmax - onehot) to
// grad when given.
double loss_cb(const Logits& z, CoarseLabel label, const ClassBalanceConfig& cfg,
               std::span<double> grad = {});

struct ClassifierGradients {
  ClassifierParams grad;
  double loss = 0.0;  // mean over the batch
};

// Mean class-balanced loss of a batch (rows of x) and its gradient.
ClassifierGradients classifier_backward(const ClassifierParams& params, const Matrix& x,
                                        std::span<const CoarseLabel> labels,
                                        const ClassBalanceConfig& cfg);

}  // namespace stepalign
