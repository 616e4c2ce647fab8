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

#include "stepalign/pipeline/experiment.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <utility>

#include "stepalign/dataset/folds.h"
#include "stepalign/error.h"
#include "stepalign/features/feature_matrix.h"
#include "stepalign/metrics/frame_metrics.h"
#include "stepalign/pipeline/config.h"

namespace stepalign {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <typename E>
[[noreturn]] void rethrow_as(const E&, const std::string& message) {
  throw E(message);
}

void round_classifier(ClassifierParams& p) {
  for (Matrix* m : p.tensors()) *m = round_to_float32(std::move(*m));
}

bool scorable(const AnnotatedVideo& v) {
  for (const auto& s : v.segments) {
    if (s.step.is_defined() && coarse_label(s.mistake) != CoarseLabel::kCorrect) return true;
  }
  return false;
}

json segment_json(const Segment& s) { return {{"start", s.start}, {"end", s.end}}; }

}  // namespace

std::string_view arm_name(Arm a) {
  switch (a) {
    case Arm::kFull:
      return "full";
    case Arm::kOracle:
      return "oracle";
    case Arm::kVideoOnly:
      return "video_only";
  }
  return "?";
}

Arm parse_arm(std::string_view name) {
  if (name == "full") return Arm::kFull;
  if (name == "oracle") return Arm::kOracle;
  if (name == "video_only" || name == "video-only") return Arm::kVideoOnly;
  throw ValidationError("unknown arm '" + std::string(name) +
                        "' (expected full, oracle or video-only)");
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.k < 2) throw ValidationError("experiment: k must be >= 2");
  if (cfg.arms.empty()) throw ValidationError("experiment: no arm enabled");
  if (cfg.jobs < 0) throw ValidationError("experiment: jobs must be >= 0");
  validate(cfg.align);
  validate(cfg.classifier);
}

json to_json(const ExperimentConfig& cfg) {
  json arms = json::array();
  for (Arm a : cfg.arms) arms.push_back(arm_name(a));
  return {{"k", cfg.k},
          {"seed", cfg.seed},
          {"arms", arms},
          {"alignment", to_json(cfg.align)},
          {"classifier", to_json(cfg.classifier)}};
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw ValidationError("experiment config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "k" && key != "seed" && key != "arms" && key != "alignment" &&
        key != "classifier") {
      throw ValidationError("experiment config: unknown key \"" + key + "\"");
    }
  }
  try {
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("arms")) {
      cfg.arms.clear();
      for (const auto& a : j.at("arms")) cfg.arms.push_back(parse_arm(a.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  if (j.contains("alignment")) cfg.align = train_config_from_json(j.at("alignment"), cfg.align);
  if (j.contains("classifier")) {
    cfg.classifier = classifier_config_from_json(j.at("classifier"), cfg.classifier);
  }
  validate(cfg);
  return cfg;
}

FoldSeeds fold_seeds(std::uint64_t seed, int fold_id) {
  const std::uint64_t base = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(fold_id)));
  return {fold_id, splitmix64(base ^ 0xa11ULL), splitmix64(base ^ 0xc1aULL)};
}

std::vector<FoldSpec> make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
  return make_group_kfold(corpus.annotations().videos, k, seed);
}

void for_each_fold(int n, int jobs, const std::function<void(int)>& body) {
  if (n <= 0) return;
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    const std::string prefix = "fold " + std::to_string(i) + ": ";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ParseError&) {
      throw;
    } catch (const InfeasibleError& e) {
      rethrow_as(e, prefix + e.what());
    } catch (const ValidationError& e) {
      rethrow_as(e, prefix + e.what());
    } catch (const NumericalError& e) {
      rethrow_as(e, prefix + e.what());
    } catch (const IoError& e) {
      rethrow_as(e, prefix + e.what());
    } catch (const Error& e) {
      rethrow_as(e, prefix + e.what());
    }
  }
}

ModelCheckpoint train_fold_alignment(const Corpus& corpus, const FoldSpec& fold,
                                     const ExperimentConfig& cfg) {
  std::vector<TrainingExample> train;
  for (const auto& id : fold.train) train.push_back(corpus.training_example(id, fold.fold_id));
  std::vector<EvalVideo> val;
  for (const auto& id : fold.val) val.push_back(corpus.video(id, fold.fold_id, Phase::kValidate));

  TrainConfig tc = cfg.align;
  tc.shape.dim = corpus.dim();
  tc.seed = fold_seeds(cfg.seed, fold.fold_id).alignment;
  TrainResult r = train_alignment(train, val, tc);

  ModelCheckpoint ckpt;
  ckpt.params = std::move(r.best);
  round_params_to_float32(ckpt.params);
  ckpt.seed = tc.seed;
  ckpt.epoch = r.best_epoch;
  ckpt.val_f1 = r.best_val_f1;
  ckpt.settings = to_json(tc);
  ckpt.settings["fold"] = fold.fold_id;
  return ckpt;
}

ClassifierCheckpoint train_fold_classifier(const Corpus& corpus, const FoldSpec& fold,
                                           const ExperimentConfig& cfg, bool video_only) {
  std::vector<EvalVideo> train, val;
  for (const auto& id : fold.train) train.push_back(corpus.video(id, fold.fold_id, Phase::kTrain));
  for (const auto& id : fold.val) val.push_back(corpus.video(id, fold.fold_id, Phase::kValidate));

  ClassifierConfig cc = cfg.classifier;
  cc.video_only = video_only;
  // Both classifiers of a fold start from the same seed; only the input differs.
  cc.seed = fold_seeds(cfg.seed, fold.fold_id).classifier;
  ClassifierTrainResult r = train_classifier(train, val, cc);

  ClassifierCheckpoint ckpt;
  ckpt.params = std::move(r.best);
  round_classifier(ckpt.params);
  ckpt.seed = cc.seed;
  ckpt.epoch = r.best_epoch;
  ckpt.val_score = r.best_val_score;
  ckpt.val_metric = r.val_metric;
  ckpt.settings = to_json(cc);
  ckpt.settings["fold"] = fold.fold_id;
  return ckpt;
}

bool arm_needs_alignment(Arm a) { return a != Arm::kOracle; }
bool arm_needs_text_classifier(Arm a) { return a != Arm::kVideoOnly; }
bool arm_needs_video_only_classifier(Arm a) { return a == Arm::kVideoOnly; }

ArmFoldResult evaluate_fold(const Corpus& corpus, const FoldSpec& fold, const FoldModels& models,
                            Arm arm, const AlignOptions& align) {
  const std::string what = "fold " + std::to_string(fold.fold_id) + ", arm " +
                           std::string(arm_name(arm));
  if (arm_needs_alignment(arm) && !models.alignment) {
    throw ValidationError(what + ": no alignment model");
  }
  const ClassifierCheckpoint* clf =
      arm == Arm::kVideoOnly ? (models.video_only ? &*models.video_only : nullptr)
                             : (models.text ? &*models.text : nullptr);
  if (clf == nullptr) throw ValidationError(what + ": no classifier");
  const bool video_only = arm == Arm::kVideoOnly;

  ArmFoldResult out;
  out.metrics.fold_id = fold.fold_id;
  std::vector<FrameMetrics> frame;
  std::vector<Detection> detections;
  std::vector<GroundTruthInstance> gt;
  bool any_scorable = false;
  for (const auto& id : fold.test) {
    const EvalVideo v = corpus.video(id, fold.fold_id, Phase::kTest);
    const AnnotatedVideo& a = *v.annotation;
    std::vector<StepSegment> segments;
    if (arm == Arm::kOracle) {
      for (const auto& s : a.segments) {
        if (s.step.is_defined()) segments.push_back({s.step.index(), s.segment});
      }
    } else {
      segments = align_video(models.alignment->params, *v.video, *v.step_text, align).segments;
    }
    frame.push_back(frame_metrics(rasterize(segments, a.num_frames, RasterMode::kPrediction),
                                  rasterize_ground_truth(a)));

    VideoPrediction p;
    p.video_id = a.video_id;
    p.fold_id = fold.fold_id;
    p.num_frames = a.num_frames;
    p.ground_truth = a.segments;
    p.detections =
        detect_mistakes(clf->params, a.video_id, segments, *v.video, *v.step_text, video_only);
    detections.insert(detections.end(), p.detections.begin(), p.detections.end());
    const auto inst = ground_truth_instances(a);
    gt.insert(gt.end(), inst.begin(), inst.end());
    any_scorable = any_scorable || scorable(a);
    out.videos.push_back(std::move(p));
  }
  out.metrics.frame = mean_frame_metrics(frame);
  if (any_scorable) out.metrics.map = map_at_tiou(detections, gt);
  return out;
}

json to_json(const VideoPrediction& v) {
  json gt = json::array();
  for (const auto& s : v.ground_truth) {
    json e = segment_json(s.segment);
    e["step"] = s.step.is_defined() ? json(s.step.index()) : json(nullptr);
    e["mistake"] = mistake_code(s.mistake);
    gt.push_back(std::move(e));
  }
  json det = json::array();
  for (const auto& d : v.detections) {
    json e = segment_json(d.segment);
    e["step"] = d.step;
    e["label"] = coarse_name(d.label);
    e["confidence"] = d.confidence;
    det.push_back(std::move(e));
  }
  return {{"video_id", v.video_id},
          {"fold", v.fold_id},
          {"num_frames", v.num_frames},
          {"ground_truth", gt},
          {"detections", det}};
}

VideoPrediction video_prediction_from_json(const json& j) {
  try {
    VideoPrediction v;
    v.video_id = j.at("video_id").get<std::string>();
    v.fold_id = j.at("fold").get<int>();
    v.num_frames = j.at("num_frames").get<int>();
    for (const auto& e : j.at("ground_truth")) {
      AnnotatedSegment s;
      s.segment = {e.at("start").get<int>(), e.at("end").get<int>()};
      if (!e.at("step").is_null()) s.step = StepRef::defined(e.at("step").get<int>());
      s.mistake = parse_mistake_code(e.at("mistake").get<std::string>());
      v.ground_truth.push_back(std::move(s));
    }
    for (const auto& e : j.at("detections")) {
      Detection d;
      d.video_id = v.video_id;
      d.segment = {e.at("start").get<int>(), e.at("end").get<int>()};
      d.step = e.at("step").get<int>();
      const std::string label = e.at("label").get<std::string>();
      bool found = false;
      for (CoarseLabel c : kAllCoarseLabels) {
        if (coarse_name(c) == label) {
          d.label = c;
          found = true;
        }
      }
      if (!found) throw ValidationError("unknown label '" + label + "'");
      d.confidence = e.at("confidence").get<double>();
      v.detections.push_back(std::move(d));
    }
    return v;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("prediction record: ") + e.what());
  }
}

json to_json(const ExperimentReport& r) {
  json arms = json::object();
  for (const auto& [arm, report] : r.arms) {
    json a = to_json(report.metrics);
    json preds = json::array();
    for (const auto& v : report.videos) preds.push_back(to_json(v));
    a["predictions"] = std::move(preds);
    arms[std::string(arm_name(arm))] = std::move(a);
  }
  json folds = json::array();
  for (const auto& s : r.fold_seeds) {
    folds.push_back({{"fold", s.fold_id}, {"alignment", s.alignment}, {"classifier", s.classifier}});
  }
  return {{"arms", arms}, {"config", r.config}, {"seeds", {{"seed", r.seed}, {"folds", folds}}}};
}

ExperimentReport experiment_report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.config = j.at("config");
    r.seed = j.at("seeds").at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("seeds").at("folds")) {
      r.fold_seeds.push_back({s.at("fold").get<int>(), s.at("alignment").get<std::uint64_t>(),
                              s.at("classifier").get<std::uint64_t>()});
    }
    for (const auto& [name, a] : j.at("arms").items()) {
      ArmReport ar;
      ar.metrics = metric_report_from_json(a);
      for (const auto& p : a.at("predictions")) ar.videos.push_back(video_prediction_from_json(p));
      r.arms.emplace(parse_arm(name), std::move(ar));
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment report: ") + e.what());
  }
}

ExperimentReport make_experiment_report(
    const ExperimentConfig& cfg, const std::vector<FoldSpec>& folds,
    const std::map<Arm, std::vector<ArmFoldResult>>& results) {
  ExperimentReport r;
  r.config = to_json(cfg);
  r.seed = cfg.seed;
  for (const auto& f : folds) r.fold_seeds.push_back(fold_seeds(cfg.seed, f.fold_id));
  for (const auto& [arm, per_fold] : results) {
    std::vector<FoldMetrics> metrics;
    ArmReport ar;
    for (const auto& res : per_fold) {
      metrics.push_back(res.metrics);
      ar.videos.insert(ar.videos.end(), res.videos.begin(), res.videos.end());
    }
    ar.metrics = make_report(std::move(metrics));
    r.arms.emplace(arm, std::move(ar));
  }
  return r;
}

ExperimentReport run_experiment(const Corpus& corpus, const std::vector<FoldSpec>& folds,
                                const ExperimentConfig& cfg) {
  validate(cfg);
  const int n = static_cast<int>(folds.size());
  bool need_align = false, need_text = false, need_video = false;
  for (Arm a : cfg.arms) {
    need_align = need_align || arm_needs_alignment(a);
    need_text = need_text || arm_needs_text_classifier(a);
    need_video = need_video || arm_needs_video_only_classifier(a);
  }

  std::map<Arm, std::vector<ArmFoldResult>> results;
  for (Arm a : cfg.arms) results[a].resize(n);
  for_each_fold(n, cfg.jobs, [&](int i) {
    const FoldSpec& fold = folds[i];
    FoldModels m;
    m.fold_id = fold.fold_id;
    if (need_align) m.alignment = train_fold_alignment(corpus, fold, cfg);
    if (need_text) m.text = train_fold_classifier(corpus, fold, cfg, false);
    if (need_video) m.video_only = train_fold_classifier(corpus, fold, cfg, true);
    for (Arm a : cfg.arms) results.at(a)[i] = evaluate_fold(corpus, fold, m, a, cfg.align.align);
  });
  return make_experiment_report(cfg, folds, results);
}

}  // namespace stepalign
