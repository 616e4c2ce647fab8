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
#include <random>

#include <gtest/gtest.h>

#include "stepalign/classifier/checkpoint.h"
#include "stepalign/classifier/classifier.h"
#include "stepalign/classifier/train.h"
#include "stepalign/error.h"
#include "stepalign/features/synth.h"
#include "testing.h"

namespace stepalign {
namespace {

ClassifierParams random_classifier(int dim, int hidden, std::mt19937_64& rng) {
  ClassifierParams p = zero_classifier(dim, hidden);
  for (Matrix* t : p.tensors()) *t = testing::random_matrix(t->rows(), t->cols(), rng);
  return p;
}

ClassBalanceConfig counts(long correct, long mistake, long correction, double beta = 0.9999) {
  ClassBalanceConfig cfg;
  cfg.beta = beta;
  cfg.counts = {correct, mistake, correction};
  return cfg;
}

TEST(ClassifyTest, ZeroParametersPredictCorrect) {
  const ClassifierParams p = zero_classifier(3, 5);
  const FeatureMatrix video(Matrix(4, 3, 1.0));
  const Classification c = classify(p, video, {0, 2}, std::vector<double>{1.0, 2.0, 3.0});
  EXPECT_EQ(c.logits, (Logits{0.0, 0.0, 0.0}));
  EXPECT_EQ(c.label, CoarseLabel::kCorrect);
  EXPECT_NEAR(c.confidence, 1.0 / 3.0, 1e-15);
}

TEST(ClassifyTest, TiesGoToTheLowestClass) {
  EXPECT_EQ(argmax_label({1.0, 1.0, 1.0}), CoarseLabel::kCorrect);
  EXPECT_EQ(argmax_label({0.0, 2.0, 2.0}), CoarseLabel::kMistake);
  EXPECT_EQ(argmax_label({0.0, 1.0, 2.0}), CoarseLabel::kCorrection);
}

TEST(ClassifyTest, MatchesStraightLineOracle) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const int d = std::uniform_int_distribution<int>(1, 6)(rng);
    const int h = std::uniform_int_distribution<int>(1, 9)(rng);
    const ClassifierParams p = random_classifier(d, h, rng);
    const FeatureMatrix video(testing::random_matrix(7, d, rng));
    const Matrix step = testing::random_matrix(1, d, rng);
    const Segment seg{2, 6};
    std::vector<double> x(2 * d);
    for (int c = 0; c < d; ++c) {
      for (int l = seg.start; l < seg.end; ++l) x[c] += video.values()(l, c) / seg.length();
      x[d + c] = step(0, c);
    }
    Logits want{};
    for (int j = 0; j < 3; ++j) {
      want[j] = p.b2(0, j);
      for (int k = 0; k < h; ++k) {
        double a = p.b1(0, k);
        for (int i = 0; i < 2 * d; ++i) a += x[i] * p.w1(i, k);
        want[j] += std::max(a, 0.0) * p.w2(k, j);
      }
    }
    const Classification got = classify(p, video, seg, step.row(0));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(got.logits[j], want[j], 1e-12);
    double sum = 0.0;
    for (double q : got.probs) sum += q;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_GT(got.confidence, 0.0);
    EXPECT_LE(got.confidence, 1.0);
  }
}

TEST(ClassifyTest, ArgmaxIgnoresLogitShift) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    const Logits z{n(rng), n(rng), n(rng)};
    const double c = n(rng) * 10.0;
    EXPECT_EQ(argmax_label(z), argmax_label({z[0] + c, z[1] + c, z[2] + c}));
  }
}

TEST(ClassifyTest, DimensionMismatchThrows) {
  const ClassifierParams p = zero_classifier(3, 4);
  const FeatureMatrix video(Matrix(4, 3, 1.0));
  EXPECT_THROW(classify(p, video, {0, 2}, std::vector<double>{1.0}), ValidationError);
  EXPECT_THROW(classify(p, FeatureMatrix(Matrix(4, 2, 1.0)), {0, 2}, {}), ValidationError);
}

TEST(ClassBalanceTest, SingleSampleWeighsOne) {
  for (double beta : {0.0, 0.9, 0.9999}) {
    EXPECT_EQ(cb_weight(counts(1, 1, 1, beta), CoarseLabel::kMistake), 1.0) << beta;
  }
}

TEST(ClassBalanceTest, TwoSamplesWeighOneOverOnePlusBeta) {
  const double w = cb_weight(counts(2, 1, 1), CoarseLabel::kCorrect);
  EXPECT_NEAR(w, 1.0 / 1.9999, 1e-12);
  // 0.500025 is the closed form rounded to six decimals.
  EXPECT_NEAR(w, 0.500025, 5e-7);
}

TEST(ClassBalanceTest, StrictlyDecreasingInCount) {
  for (double beta : {0.5, 0.9, 0.9999}) {
    double prev = 2.0;
    // Up to r = 40 the power stays distinguishable from 0 in double.
    for (long r = 1; r <= 40; ++r) {
      const double w = cb_weight(counts(r, 1, 1, beta), CoarseLabel::kCorrect);
      EXPECT_LT(w, prev);
      prev = w;
    }
  }
}

TEST(ClassBalanceTest, MissingCountThrows) {
  ClassBalanceConfig cfg = counts(3, 2, 1);
  cfg.counts[2].reset();
  EXPECT_THROW(cb_weight(cfg, CoarseLabel::kCorrection), ValidationError);
  cfg = counts(3, 0, 1);
  EXPECT_THROW(cb_weight(cfg, CoarseLabel::kMistake), ValidationError);
}

TEST(LossCbTest, UniformLogitsGiveLogThree) {
  EXPECT_NEAR(loss_cb({0.0, 0.0, 0.0}, CoarseLabel::kMistake, counts(1, 1, 1)), std::log(3.0),
              1e-15);
  EXPECT_LT(loss_cb({0.0, 800.0, 0.0}, CoarseLabel::kMistake, counts(1, 1, 1)), 1e-300);
}

TEST(LossCbTest, EqualsWeightTimesCrossEntropy) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const Logits z{n(rng), n(rng), n(rng)};
    const auto cfg = counts(1 + t, 3, 7);
    for (CoarseLabel c : kAllCoarseLabels) {
      const int i = static_cast<int>(c);
      const double ce = -std::log(std::exp(z[i]) / (std::exp(z[0]) + std::exp(z[1]) + std::exp(z[2])));
      EXPECT_NEAR(loss_cb(z, c, cfg), cb_weight(cfg, c) * ce, 1e-12);
    }
  }
}

TEST(LossCbTest, LogitGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  constexpr double h = 1e-5;
  for (int t = 0; t < 30; ++t) {
    Logits z{n(rng), n(rng), n(rng)};
    const auto cfg = counts(1 + t, 2, 5, 0.9);
    const CoarseLabel c = kAllCoarseLabels[t % 3];
    std::array<double, 3> g{};
    loss_cb(z, c, cfg, g);
    for (int i = 0; i < 3; ++i) {
      Logits up = z, down = z;
      up[i] += h;
      down[i] -= h;
      const double fd = (loss_cb(up, c, cfg) - loss_cb(down, c, cfg)) / (2.0 * h);
      EXPECT_LT(std::abs(fd - g[i]) / std::max(std::abs(fd) + std::abs(g[i]), 1e-8), 1e-6);
    }
  }
}

TEST(ClassifierBackwardTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int config = 0; config < 24; ++config) {
    const testing::GradientCheck c = testing::check_classifier_gradients(rng);
    EXPECT_LT(c.loss_mismatch, 1e-12) << "config " << config;
    for (std::size_t ti = 0; ti < kClassifierTensorNames.size(); ++ti) {
      EXPECT_LT(c.tensor_errors[ti], 1e-6)
          << "config " << config << " tensor " << kClassifierTensorNames[ti];
    }
  }
}

// Noise-free corpus whose mistakes are all visible in the video alone.
SynthCorpus separable_corpus() {
  SynthConfig cfg;
  cfg.tasks = 2;
  cfg.videos_per_task = 8;
  cfg.noise_sigma = 0.0;
  cfg.p_exec_mistake = 0.4;
  cfg.kind_weights = {0.4, 0.3, 0.3, 0.0, 0.0, 0.0};
  cfg.seed = 2;
  return synth_corpus(cfg);
}

std::vector<EvalVideo> eval_videos(const SynthCorpus& c) {
  std::vector<EvalVideo> out;
  for (const auto& v : c.annotations.videos) {
    out.push_back({&v, &c.video_features.at(v.video_id), &c.step_features.at(v.task)});
  }
  return out;
}

ClassifierConfig small_classifier_config() {
  ClassifierConfig cfg;
  cfg.hidden = 32;
  cfg.epochs = 300;
  cfg.eval_every = 100;
  cfg.adam.learning_rate = 3e-3;
  cfg.seed = 9;
  return cfg;
}

TEST(TrainClassifierTest, FitsSeparableSegments) {
  const SynthCorpus c = separable_corpus();
  const auto videos = eval_videos(c);
  const ClassifierConfig cfg = small_classifier_config();
  const ClassifierTrainResult r = train_classifier(videos, {}, cfg);
  const auto samples = teacher_forced_samples(videos, false);
  int right = 0;
  for (const auto& s : samples) right += classify_input(r.best, s.x).label == s.label;
  EXPECT_GE(static_cast<double>(right) / samples.size(), 0.95);

  // Oracle segments with the oracle-trained classifier recover every label.
  const auto detections = detect_on_ground_truth(r.best, videos, false);
  std::size_t i = 0;
  for (const auto& v : videos) {
    for (const auto& s : v.annotation->segments) {
      if (!s.step.is_defined()) continue;
      ASSERT_LT(i, detections.size());
      EXPECT_EQ(detections[i].label, coarse_label(s.mistake)) << v.annotation->video_id;
      EXPECT_EQ(detections[i].segment, s.segment);
      ++i;
    }
  }
  EXPECT_EQ(i, detections.size());
}

TEST(TrainClassifierTest, SameSeedGivesIdenticalParameters) {
  const SynthCorpus c = separable_corpus();
  const auto videos = eval_videos(c);
  ClassifierConfig cfg = small_classifier_config();
  cfg.epochs = 20;
  cfg.eval_every = 5;
  const std::vector<EvalVideo> train(videos.begin(), videos.begin() + 12);
  const std::vector<EvalVideo> val(videos.begin() + 12, videos.end());
  const ClassifierTrainResult a = train_classifier(train, val, cfg);
  const ClassifierTrainResult b = train_classifier(train, val, cfg);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(*a.best.tensors()[i], *b.best.tensors()[i]);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_EQ(a.val_log, b.val_log);
}

TEST(TrainClassifierTest, AllCorrectFoldRaisesClassCountError) {
  SynthConfig cfg;
  cfg.tasks = 1;
  cfg.videos_per_task = 4;
  cfg.p_exec_mistake = 0.0;
  const SynthCorpus c = synth_corpus(cfg);
  const auto videos = eval_videos(c);
  try {
    train_classifier(videos, {}, small_classifier_config());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no training samples"), std::string::npos) << e.what();
  }
}

TEST(TeacherForcingTest, UndefinedSegmentsGetZeroText) {
  const SynthCorpus c = separable_corpus();
  const auto videos = eval_videos(c);
  const auto samples = teacher_forced_samples(videos, false);
  bool saw_undefined = false;
  for (const auto& s : samples) {
    const std::size_t d = s.x.size() / 2;
    if (s.step == 0) {
      saw_undefined = true;
      for (std::size_t i = d; i < s.x.size(); ++i) EXPECT_EQ(s.x[i], 0.0);
    }
  }
  EXPECT_TRUE(saw_undefined);
  for (const auto& s : teacher_forced_samples(videos, true)) {
    for (std::size_t i = s.x.size() / 2; i < s.x.size(); ++i) EXPECT_EQ(s.x[i], 0.0);
  }
}

TEST(DetectTest, EmptyAlignmentGivesNoDetections) {
  const ClassifierParams p = zero_classifier(2, 3);
  const FeatureMatrix video(Matrix(3, 2, 1.0)), text(Matrix(2, 2, 1.0));
  EXPECT_TRUE(detect_mistakes(p, "v", {}, video, text, false).empty());
  const std::vector<StepSegment> one = {{2, {0, 2}}};
  const auto d = detect_mistakes(p, "v", one, video, text, false);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].step, 2);
  EXPECT_EQ(d[0].video_id, "v");
  EXPECT_NEAR(d[0].confidence, 1.0 / 3.0, 1e-15);
}

TEST(ClassifierCheckpointTest, RoundTripsAtFloat32) {
  testing::TempDir dir;
  std::mt19937_64 rng(6);
  ClassifierCheckpoint ckpt;
  ckpt.params = random_classifier(3, 4, rng);
  ckpt.seed = 4;
  ckpt.epoch = 50;
  ckpt.val_score = 0.25;
  ckpt.val_metric = "map";
  save_classifier_checkpoint(dir / "c.ckpt", ckpt);
  const ClassifierCheckpoint back = load_classifier_checkpoint(dir / "c.ckpt");
  for (int i = 0; i < 4; ++i) {
    const Matrix& want = *ckpt.params.tensors()[i];
    const Matrix& got = *back.params.tensors()[i];
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t j = 0; j < got.size(); ++j) {
      EXPECT_EQ(got.flat()[j], static_cast<double>(static_cast<float>(want.flat()[j])));
    }
  }
  EXPECT_EQ(back.val_metric, "map");
  EXPECT_EQ(back.epoch, 50);
  EXPECT_EQ(back.params.hidden, 4);
  EXPECT_THROW(load_classifier_checkpoint(dir / "missing.ckpt"), IoError);
}

}  // namespace
}  // namespace stepalign
