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

#include <map>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stepalign/error.h"
#include "stepalign/features/feature_io.h"
#include "stepalign/features/synth.h"
#include "stepalign/pipeline/config.h"
#include "stepalign/pipeline/corpus.h"
#include "stepalign/pipeline/experiment.h"
#include "stepalign/pipeline/timeline_svg.h"
#include "testing.h"

namespace stepalign {
namespace {

// Standard shape (5 tasks x 10 videos, 4 workers) but short and narrow.
SynthConfig tiny_synth() {
  SynthConfig cfg;
  cfg.dim = 16;
  cfg.steps_per_task = {3, 3, 4, 3, 4};
  cfg.frames_per_step = {3, 5};
  cfg.p_exec_mistake = 0.9;
  cfg.kind_weights = {1, 1, 1, 1, 1, 1};
  cfg.seed = 1;
  return cfg;
}

ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.align.shape = {16, 8, 6};
  cfg.align.epochs = 2;
  cfg.classifier.hidden = 8;
  cfg.classifier.epochs = 4;
  cfg.classifier.eval_every = 2;
  cfg.jobs = 1;
  return cfg;
}

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new Corpus(Corpus::from_synth(synth_corpus(tiny_synth())));
    folds_ = new std::vector<FoldSpec>(make_folds(*corpus_, 5, 3));
    corpus_->clear_access_log();
    report_ = new ExperimentReport(run_experiment(*corpus_, *folds_, tiny_experiment()));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete folds_;
    delete corpus_;
  }

  static Corpus* corpus_;
  static std::vector<FoldSpec>* folds_;
  static ExperimentReport* report_;
};

Corpus* ExperimentTest::corpus_ = nullptr;
std::vector<FoldSpec>* ExperimentTest::folds_ = nullptr;
ExperimentReport* ExperimentTest::report_ = nullptr;

TEST_F(ExperimentTest, TestVideosAreOnlyReadInTheTestPhase) {
  const auto log = corpus_->access_log();
  ASSERT_FALSE(log.empty());
  std::map<int, std::set<std::string>> test_ids, val_ids;
  for (const auto& f : *folds_) {
    test_ids[f.fold_id] = {f.test.begin(), f.test.end()};
    val_ids[f.fold_id] = {f.val.begin(), f.val.end()};
  }
  int test_reads = 0;
  for (const auto& r : log) {
    const bool is_test = test_ids.at(r.fold_id).contains(r.video_id);
    if (r.phase == Phase::kTest) {
      EXPECT_TRUE(is_test) << r.video_id << " read as test in fold " << r.fold_id;
      ++test_reads;
    } else {
      EXPECT_FALSE(is_test) << r.video_id << " read during " << phase_name(r.phase)
                            << " in fold " << r.fold_id;
    }
    if (r.phase == Phase::kValidate) {
      EXPECT_TRUE(val_ids.at(r.fold_id).contains(r.video_id));
    }
  }
  EXPECT_GT(test_reads, 0);
}

TEST_F(ExperimentTest, MeansAreArithmeticMeansOfFolds) {
  ASSERT_EQ(report_->arms.size(), 3u);
  for (const auto& [arm, ar] : report_->arms) {
    const auto& folds = ar.metrics.folds;
    ASSERT_EQ(folds.size(), 5u) << arm_name(arm);
    double p = 0, r = 0, f1 = 0, mof = 0, map = 0;
    int with_map = 0;
    for (const auto& f : folds) {
      p += f.frame.precision;
      r += f.frame.recall;
      f1 += f.frame.f1;
      mof += f.frame.mof;
      if (f.map) {
        map += f.map->average;
        ++with_map;
      }
    }
    EXPECT_NEAR(ar.metrics.mean_frame.precision, p / 5, 1e-15);
    EXPECT_NEAR(ar.metrics.mean_frame.recall, r / 5, 1e-15);
    EXPECT_NEAR(ar.metrics.mean_frame.f1, f1 / 5, 1e-15);
    EXPECT_NEAR(ar.metrics.mean_frame.mof, mof / 5, 1e-15);
    if (with_map > 0) {
      ASSERT_TRUE(ar.metrics.mean_map_average.has_value());
      EXPECT_NEAR(*ar.metrics.mean_map_average, map / with_map, 1e-15);
    }
  }
}

TEST_F(ExperimentTest, OracleArmSeesGroundTruthSegments) {
  const ArmReport& oracle = report_->arms.at(Arm::kOracle);
  EXPECT_EQ(oracle.metrics.mean_frame.f1, 1.0);
  for (const auto& v : oracle.videos) {
    std::size_t defined = 0;
    for (const auto& s : v.ground_truth) defined += s.step.is_defined();
    EXPECT_EQ(v.detections.size(), defined) << v.video_id;
  }
}

TEST_F(ExperimentTest, EveryTestVideoIsPredictedOncePerArm) {
  for (const auto& [arm, ar] : report_->arms) {
    std::multiset<std::string> seen;
    for (const auto& v : ar.videos) seen.insert(v.video_id);
    EXPECT_EQ(seen.size(), 50u) << arm_name(arm);
    EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 50u);
  }
}

TEST_F(ExperimentTest, RerunIsIdenticalAndIndependentOfJobs) {
  ExperimentConfig cfg = tiny_experiment();
  cfg.jobs = 2;
  const ExperimentReport again = run_experiment(*corpus_, *folds_, cfg);
  EXPECT_EQ(to_json(again).dump(), to_json(*report_).dump());
}

TEST_F(ExperimentTest, ReportJsonRoundTrips) {
  const nlohmann::json j = to_json(*report_);
  EXPECT_TRUE(j.contains("arms"));
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("seeds"));
  EXPECT_TRUE(j["arms"]["full"].contains("per_fold"));
  EXPECT_TRUE(j["arms"]["full"].contains("mean"));
  EXPECT_EQ(to_json(experiment_report_from_json(j)).dump(), j.dump());
}

TEST_F(ExperimentTest, TimelineSvgDrawsBothRows) {
  const VideoPrediction& v = report_->arms.at(Arm::kFull).videos.front();
  const std::string svg = timeline_svg(v);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("ground truth"), std::string::npos);
  EXPECT_NE(svg.find("predicted"), std::string::npos);
}

TEST(TimelineSvgTest, HatchesMistakesAndEscapesText) {
  VideoPrediction v;
  v.video_id = "a<b&c";
  v.num_frames = 10;
  AnnotatedSegment s;
  s.segment = {0, 4};
  s.step = StepRef::defined(1);
  s.mistake = MistakeLabel::exec(MistakeKind::kHowTo);
  s.description = "oops";
  v.ground_truth.push_back(s);
  AnnotatedSegment u;
  u.segment = {5, 7};
  u.mistake = MistakeLabel::exec(MistakeKind::kOthers);
  u.description = "extra";
  v.ground_truth.push_back(u);
  v.detections.push_back({v.video_id, 1, {1, 4}, CoarseLabel::kCorrect, 0.9});
  const std::string svg = timeline_svg(v);
  EXPECT_EQ(svg.find("a<b&c"), std::string::npos);
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
  EXPECT_NE(svg.find("url(#hatch)"), std::string::npos);
  EXPECT_NE(svg.find("#bbb"), std::string::npos);
}

TEST(CorpusTest, LoadsSavedSynthCorpus) {
  testing::TempDir dir;
  SynthConfig cfg = tiny_synth();
  cfg.tasks = 2;
  cfg.videos_per_task = 3;
  const SynthCorpus synth = synth_corpus(cfg);
  save_synth_corpus(dir.path(), synth);
  const Corpus c = Corpus::load(dir.path());
  EXPECT_EQ(c.dim(), 16);
  EXPECT_EQ(c.annotations().videos, synth.annotations.videos);
  const std::string id = synth.annotations.videos.front().video_id;
  const EvalVideo v = c.video(id, 2, Phase::kValidate);
  EXPECT_EQ(v.video->rows(), static_cast<std::size_t>(v.annotation->num_frames));
  EXPECT_EQ(c.access_log(), (std::vector<AccessRecord>{{2, Phase::kValidate, id}}));
  EXPECT_THROW(c.video("nope", 0, Phase::kTrain), ValidationError);
}

TEST(CorpusTest, MissingOrMismatchedFeaturesAreReported) {
  testing::TempDir dir;
  SynthConfig cfg = tiny_synth();
  cfg.tasks = 1;
  cfg.videos_per_task = 2;
  const SynthCorpus synth = synth_corpus(cfg);
  save_synth_corpus(dir.path(), synth);
  const std::string id = synth.annotations.videos.front().video_id;
  const auto fmtx = dir / "features" / (id + ".fmtx");

  write_features(FeatureMatrix(Matrix(3, 16, 0.5)), fmtx, id);
  EXPECT_THROW(Corpus::load(dir.path()), ValidationError);

  std::filesystem::remove(fmtx);
  try {
    Corpus::load(dir.path());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(fmtx.string()), std::string::npos);
  }
}

TEST(ForEachFoldTest, RunsEveryIndexOnAnyNumberOfThreads) {
  for (int jobs : {1, 2, 4}) {
    std::vector<int> hits(7, 0);
    for_each_fold(7, jobs, [&](int i) { ++hits[i]; });
    EXPECT_EQ(hits, std::vector<int>(7, 1));
  }
}

TEST(ForEachFoldTest, RethrowsLowestFailingFoldWithItsType) {
  try {
    for_each_fold(5, 2, [](int i) {
      if (i == 3) throw IoError("disk");
      if (i == 1) throw NumericalError("nan");
    });
    FAIL() << "expected an exception";
  } catch (const NumericalError& e) {
    EXPECT_EQ(std::string(e.what()), "fold 1: nan");
  }
}

TEST(ExperimentConfigTest, JsonRoundTripAndUnknownKeys) {
  ExperimentConfig cfg = tiny_experiment();
  cfg.arms = {Arm::kOracle};
  const nlohmann::json j = to_json(cfg);
  EXPECT_FALSE(j.contains("jobs"));
  EXPECT_EQ(to_json(experiment_config_from_json(j)), j);
  nlohmann::json bad = j;
  bad["alignment"]["epoch"] = 3;
  EXPECT_THROW(experiment_config_from_json(bad), ValidationError);
  EXPECT_THROW(train_config_from_json({{"adam", {{"lr", 1.0}}}}), ValidationError);
  EXPECT_EQ(classifier_config_from_json({{"epochs", 7}}).epochs, 7);
}

TEST(ExperimentConfigTest, ArmsAndValidation) {
  EXPECT_EQ(parse_arm("video-only"), Arm::kVideoOnly);
  EXPECT_EQ(parse_arm("oracle"), Arm::kOracle);
  EXPECT_THROW(parse_arm("gt"), ValidationError);
  ExperimentConfig cfg;
  cfg.arms.clear();
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = ExperimentConfig{};
  cfg.k = 1;
  EXPECT_THROW(validate(cfg), ValidationError);
}

TEST(FoldSeedsTest, DeterministicAndDistinct) {
  EXPECT_EQ(fold_seeds(5, 2).alignment, fold_seeds(5, 2).alignment);
  std::set<std::uint64_t> seen;
  for (int f = 0; f < 5; ++f) {
    seen.insert(fold_seeds(5, f).alignment);
    seen.insert(fold_seeds(5, f).classifier);
  }
  EXPECT_EQ(seen.size(), 10u);
}

TEST(EvaluateFoldTest, MissingModelsAreRejected) {
  const Corpus corpus = Corpus::from_synth(synth_corpus(tiny_synth()));
  const auto folds = make_folds(corpus, 5, 0);
  FoldModels none;
  EXPECT_THROW(evaluate_fold(corpus, folds[0], none, Arm::kFull, {}), ValidationError);
  EXPECT_THROW(evaluate_fold(corpus, folds[0], none, Arm::kOracle, {}), ValidationError);
}

}  // namespace
}  // namespace stepalign
