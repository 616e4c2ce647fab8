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

// Runs the acceptance criteria end to end and prints one PASS/FAIL line per
// criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "oracles.h"
#include "stepalign/align/drop_dtw.h"
#include "stepalign/classifier/classifier.h"
#include "stepalign/dataset/agreement.h"
#include "stepalign/dataset/corpus_io.h"
#include "stepalign/dataset/folds.h"
#include "stepalign/features/synth.h"
#include "stepalign/metrics/frame_metrics.h"
#include "stepalign/metrics/map.h"
#include "stepalign/model/losses.h"
#include "stepalign/pipeline/corpus.h"
#include "stepalign/pipeline/experiment.h"

namespace stepalign {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check; the first failure message is kept.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome drop_dtw_exactness() {
  Outcome o;
  std::mt19937_64 rng(1);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int bitwise = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 4)(rng);
    const int m = std::uniform_int_distribution<int>(1, 7)(rng);
    const CostMatrix c(testing::random_matrix(n, m, rng));
    const double drop = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double fast = drop_dtw(c, drop).total_cost;
    const double slow = brute_force_align(c, drop).total_cost;
    bitwise += fast == slow;
    worst = std::max(worst, std::abs(fast - slow));
  }
  const double secs = seconds_since(t0);
  o.expect(worst <= 1e-12, "max |drop_dtw - brute force| " + fmt("%.3g", worst));
  o.expect(secs < 10.0, "took " + fmt("%.2f", secs) + " s");
  if (o.pass) {
    o.detail = std::to_string(bitwise) + "/1000 bitwise equal, max diff " + fmt("%.3g", worst) +
               ", " + fmt("%.2f", secs) + " s";
  }
  return o;
}

Outcome gradient_fidelity() {
  Outcome o;
  std::mt19937_64 rng(2);
  double model_worst = 0.0, classifier_worst = 0.0;
  constexpr int kConfigs = 24;
  for (int config = 0; config < kConfigs; ++config) {
    model_worst = std::max(model_worst, testing::check_model_gradients(config, rng).max_error());
    classifier_worst =
        std::max(classifier_worst, testing::check_classifier_gradients(rng).max_error());
  }
  o.expect(model_worst < 1e-4, "model relative error " + fmt("%.3g", model_worst));
  o.expect(classifier_worst < 1e-6, "classifier relative error " + fmt("%.3g", classifier_worst));
  if (o.pass) {
    o.detail = std::to_string(kConfigs) + " configs each, model " + fmt("%.2g", model_worst) +
               ", classifier " + fmt("%.2g", classifier_worst);
  }
  return o;
}

Outcome supervised_closed_forms() {
  Outcome o;
  std::mt19937_64 rng(3);
  const Matrix frames = testing::random_matrix(6, 3, rng);
  const double full = loss_supervised(std::vector<double>{0.3, -0.2, 0.9}, Segment{0, 6}, frames,
                                      0.03);
  o.expect(full == 0.0, "full-segment loss " + fmt("%.17g", full));
  const Matrix two(2, 2, {1.0, 0.0, 1.0, 0.0});
  const double half =
      loss_supervised(std::vector<double>{1.0, 1.0}, Segment{0, 1}, two, 0.03);
  o.expect(std::abs(half - std::log(2.0)) <= 1e-12, "equal-cosine loss " + fmt("%.17g", half));
  if (o.pass) o.detail = "0 exactly, ln 2 " + fmt("%+.2g", half - std::log(2.0));
  return o;
}

Outcome class_balance_closed_forms() {
  Outcome o;
  for (double beta : {0.0, 0.9, 0.9999}) {
    ClassBalanceConfig cfg;
    cfg.beta = beta;
    cfg.counts = {1, 1, 1};
    const double w = cb_weight(cfg, CoarseLabel::kCorrect);
    o.expect(w == 1.0, "r=1, beta " + fmt("%g", beta) + " gives " + fmt("%.17g", w));
  }
  ClassBalanceConfig cfg;
  cfg.beta = 0.9999;
  cfg.counts = {2, 1, 1};
  const double w = cb_weight(cfg, CoarseLabel::kCorrect);
  const double exact = 1.0 / 1.9999;
  o.expect(std::abs(w - exact) <= 1e-9, "r=2 gives " + fmt("%.12f", w));
  // 0.500025 is the closed form (1 - b) / (1 - b^2) = 1 / (1 + b) rounded to
  // six decimals; the exact value lies 1.25e-9 above it.
  o.expect(std::abs(w - 0.500025) < 5e-7, "r=2 gives " + fmt("%.12f", w));
  if (o.pass) {
    o.detail = "r=2 -> " + fmt("%.11f", w) + " = 1/(1+beta) " + fmt("%+.1g", w - exact) +
               " (0.500025 rounded, off by " + fmt("%.3g", w - 0.500025) + ")";
  }
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const testing::MapCase c = testing::random_map_case(rng);
    const MapResult r = map_at_tiou(c.det, c.gt);
    const std::vector<double> expected = testing::brute_force_map(c, r.thresholds);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      worst = std::max(worst, std::abs(r.map[i] - expected[i]));
    }
  }
  o.expect(worst <= 1e-9, "max |mAP - oracle| " + fmt("%.3g", worst));
  const FrameMetrics m = frame_metrics({1, 1, 1, 2, 2}, {1, 1, 2, 2, kBackground});
  o.expect(m.precision == 0.6 && m.recall == 0.75 && m.mof == 0.6 &&
               std::abs(m.f1 - 2.0 / 3.0) < 1e-15,
           "frame metrics P " + fmt("%g", m.precision) + " R " + fmt("%g", m.recall) + " F1 " +
               fmt("%g", m.f1) + " MoF " + fmt("%g", m.mof));
  if (o.pass) o.detail = "100 cases, max diff " + fmt("%.2g", worst) + "; P 0.6 R 0.75 MoF 0.6";
  return o;
}

Outcome agreement_checks() {
  Outcome o;
  auto video = [](int start, int end) {
    AnnotatedVideo v;
    v.video_id = "v";
    v.worker_id = "w";
    v.num_frames = 20;
    AnnotatedSegment s;
    s.segment = {start, end};
    s.step = StepRef::defined(1);
    v.segments.push_back(s);
    return v;
  };
  const double t = agreement_tiou(video(0, 10), video(5, 15));
  o.expect(std::abs(t - 1.0 / 3.0) <= 1e-12, "tIoU " + fmt("%.17g", t));
  using C = CoarseLabel;
  const std::vector<C> a = {C::kCorrect, C::kCorrect, C::kMistake};
  const std::vector<C> b = {C::kCorrect, C::kMistake, C::kMistake};
  const double k1 = cohens_kappa(a, a), k04 = cohens_kappa(a, b);
  const double kneg = cohens_kappa(std::vector<C>{C::kCorrect, C::kMistake},
                                   std::vector<C>{C::kMistake, C::kCorrect});
  o.expect(std::abs(k1 - 1.0) <= 1e-12, "kappa " + fmt("%.17g", k1));
  o.expect(std::abs(k04 - 0.4) <= 1e-12, "kappa " + fmt("%.17g", k04));
  o.expect(std::abs(kneg + 1.0) <= 1e-12, "kappa " + fmt("%.17g", kneg));
  if (o.pass) o.detail = "tIoU 1/3, kappa 1 / 0.4 / -1";
  return o;
}

Outcome split_protocol() {
  Outcome o;
  const SynthCorpus synth = synth_corpus(SynthConfig{});
  const auto& videos = synth.annotations.videos;
  std::map<std::string, const AnnotatedVideo*> by_id;
  std::set<std::string> workers;
  for (const auto& v : videos) {
    by_id[v.video_id] = &v;
    workers.insert(v.worker_id);
  }
  o.expect(videos.size() == 50 && workers.size() == 4, "corpus is not 5 x 10 by 4 workers");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto folds = make_group_kfold(videos, 5, seed);
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    o.expect(folds.size() == 5, tag + "fold count");
    std::set<std::string> tested;
    for (const auto& f : folds) {
      const std::string ftag = tag + "fold " + std::to_string(f.fold_id) + " ";
      o.expect(f.train.size() == 30 && f.val.size() == 10 && f.test.size() == 10,
               ftag + "is not 30/10/10");
      std::set<std::string> all(f.train.begin(), f.train.end());
      all.insert(f.val.begin(), f.val.end());
      all.insert(f.test.begin(), f.test.end());
      o.expect(all.size() == 50, ftag + "parts overlap");
      tested.insert(f.test.begin(), f.test.end());
      std::set<std::string> test_workers;
      for (const auto& id : f.test) test_workers.insert(by_id.at(id)->worker_id);
      for (const auto& id : f.train) {
        o.expect(!test_workers.contains(by_id.at(id)->worker_id),
                 ftag + "shares a worker between train and test");
      }
      for (const auto* part : {&f.val, &f.test}) {
        std::map<std::pair<TaskDomain, RunIntent>, int> cells;
        for (const auto& id : *part) ++cells[{by_id.at(id)->task, by_id.at(id)->intent}];
        o.expect(cells.size() == 10, ftag + "misses a task/intent cell");
        for (const auto& [cell, count] : cells) {
          o.expect(count == 1, ftag + "has two videos of one task/intent cell");
        }
      }
    }
    o.expect(tested.size() == 50, tag + "test sets do not cover the corpus");
  }
  if (o.pass) o.detail = "10 split seeds, 30/10/10 with one correct and one mistake per task";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Corpus corpus = Corpus::from_synth(synth_corpus(SynthConfig{}));
  const auto folds = make_folds(corpus, 5, 0);
  const ExperimentReport r = run_experiment(corpus, folds, ExperimentConfig{});
  const double secs = seconds_since(t0);
  const double f1 = r.arms.at(Arm::kFull).metrics.mean_frame.f1;
  const auto map_of = [&](Arm arm) { return *r.arms.at(arm).metrics.mean_map_average; };
  const double oracle = map_of(Arm::kOracle), full = map_of(Arm::kFull),
               video_only = map_of(Arm::kVideoOnly);
  const std::string numbers = "F1 " + fmt("%.3f", f1) + ", mAP oracle " + fmt("%.3f", oracle) +
                              " full " + fmt("%.3f", full) + " video-only " +
                              fmt("%.3f", video_only) + ", " + fmt("%.0f", secs) + " s";
  o.expect(f1 >= 0.9, numbers);
  o.expect(oracle >= full, numbers);
  o.expect(full >= video_only + 0.05, numbers);
  o.expect(secs < 600.0, numbers);
  if (o.pass) o.detail = numbers;
  return o;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"stepalign"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != cli::kOk) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream f(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(f),
                                                   std::istreambuf_iterator<char>()};
  }
  return files;
}

// Every train and eval command, run twice from scratch on a reduced config.
Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "stepalign_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  ExperimentConfig cfg;
  cfg.align.epochs = 4;
  cfg.classifier.epochs = 20;
  cfg.classifier.eval_every = 5;
  write_json_file(root / "experiment.json", to_json(cfg));

  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    const std::string corpus = (dir / "corpus").string(), folds = (dir / "folds.json").string(),
                      ckpts = (dir / "ckpts").string(), exp_cfg = (root / "experiment.json").string();
    const std::vector<std::vector<std::string>> commands = {
        {"synth", "--seed", "0", "--out", corpus},
        {"split", "--corpus", corpus, "--seed", "0", "--out", folds},
        {"train-align", "--corpus", corpus, "--folds", folds, "--config", exp_cfg, "--seed", "7",
         "--out", ckpts},
        {"train-detect", "--corpus", corpus, "--folds", folds, "--config", exp_cfg, "--seed", "7",
         "--out", ckpts},
        {"eval", "--corpus", corpus, "--folds", folds, "--ckpts", ckpts, "--arm", "full", "--out",
         (dir / "reports" / "full.json").string()},
        {"eval", "--corpus", corpus, "--folds", folds, "--ckpts", ckpts, "--arm", "video-only",
         "--out", (dir / "reports" / "video_only.json").string()},
        {"experiment", "--corpus", corpus, "--folds", folds, "--config", exp_cfg, "--seed", "7",
         "--out", (dir / "reports" / "experiment.json").string()},
    };
    for (const auto& c : commands) {
      const int code = run_cli(c);
      o.expect(code == cli::kOk, c.front() + " exited with " + std::to_string(code));
      if (!o.pass) return o;
    }
  }
  const auto a = read_tree(root / "a"), b = read_tree(root / "b");
  o.expect(a.size() == b.size(), "runs wrote different file sets");
  int ckpt_files = 0, reports = 0;
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    o.expect(it != b.end() && it->second == bytes, name + " differs between runs");
    ckpt_files += name.ends_with(".ckpt");
    reports += name.starts_with("reports");
  }
  fs::remove_all(root);
  if (o.pass) {
    o.detail = std::to_string(a.size()) + " files byte-identical (" + std::to_string(ckpt_files) +
               " checkpoints, " + std::to_string(reports) + " reports)";
  }
  return o;
}

}  // namespace
}  // namespace stepalign

int main() {
  using stepalign::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"drop-dtw equals brute force", stepalign::drop_dtw_exactness},
      {"gradients match finite differences", stepalign::gradient_fidelity},
      {"supervised loss closed forms", stepalign::supervised_closed_forms},
      {"class-balance weight closed forms", stepalign::class_balance_closed_forms},
      {"metric oracles", stepalign::metric_oracles},
      {"agreement checks", stepalign::agreement_checks},
      {"split protocol", stepalign::split_protocol},
      {"end-to-end plant and recover", stepalign::end_to_end},
      {"determinism", stepalign::determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
