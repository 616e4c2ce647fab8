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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stepalign/dataset/agreement.h"
#include "stepalign/dataset/corpus_io.h"
#include "stepalign/dataset/folds.h"
#include "stepalign/error.h"
#include "stepalign/features/synth.h"
#include "stepalign/pipeline/corpus.h"
#include "stepalign/pipeline/experiment.h"
#include "stepalign/pipeline/timeline_svg.h"

namespace stepalign::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigFile = "config.json";

fs::path alignment_path(const fs::path& dir, int fold) {
  return dir / ("fold_" + std::to_string(fold)) / "alignment.ckpt";
}

fs::path classifier_path(const fs::path& dir, int fold, bool video_only) {
  return dir / ("fold_" + std::to_string(fold)) /
         (video_only ? "classifier_video_only.ckpt" : "classifier_text.ckpt");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

// Options shared by the training and evaluation commands.
struct RunOptions {
  std::string corpus;
  std::string folds;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> align_epochs;
  std::optional<int> classifier_epochs;
  int jobs = 0;
};

void add_run_options(CLI::App* app, RunOptions& o, bool seed_required) {
  app->add_option("--corpus", o.corpus, "Corpus directory")->required();
  app->add_option("--folds", o.folds, "Fold file written by split")->required();
  app->add_option("--config", o.config, "Experiment config JSON");
  auto* seed = app->add_option("--seed", o.seed, "Base seed for training");
  if (seed_required) seed->required();
  app->add_option("--align-epochs", o.align_epochs, "Override alignment epochs");
  app->add_option("--classifier-epochs", o.classifier_epochs, "Override classifier epochs");
  app->add_option("--jobs", o.jobs, "Parallel fold workers (0: one per core)")
      ->check(CLI::NonNegativeNumber);
}

ExperimentConfig load_config(const RunOptions& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = experiment_config_from_json(read_json_file(o.config));
  if (o.seed) cfg.seed = *o.seed;
  if (o.align_epochs) cfg.align.epochs = *o.align_epochs;
  if (o.classifier_epochs) cfg.classifier.epochs = *o.classifier_epochs;
  cfg.jobs = o.jobs;
  validate(cfg);
  return cfg;
}

// The config used at training time, stored next to the checkpoints so that
// evaluation reports carry the same config and seeds.
void save_run_config(const fs::path& dir, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  write_json_file(dir / kConfigFile, to_json(cfg));
}

ExperimentConfig load_run_config(const fs::path& dir) {
  const fs::path p = dir / kConfigFile;
  if (!fs::exists(p)) throw IoError("run config not found: " + p.string());
  return experiment_config_from_json(read_json_file(p));
}

int cmd_synth(const std::string& config, std::uint64_t seed, const std::string& out_dir,
              std::ostream& out) {
  SynthConfig cfg;
  if (!config.empty()) cfg = synth_config_from_json(read_json_file(config));
  cfg.seed = seed;
  const SynthCorpus corpus = synth_corpus(cfg);
  save_synth_corpus(out_dir, corpus);
  write_json_file(fs::path(out_dir) / "synth_config.json", to_json(cfg));
  out << "wrote " << corpus.annotations.videos.size() << " videos to " << out_dir << "\n";
  return kOk;
}

int cmd_split(const std::string& corpus_dir, int k, std::uint64_t seed, const std::string& path,
              std::ostream& out) {
  const AnnotationCorpus corpus = load_corpus(corpus_dir);
  const auto folds = make_group_kfold(corpus.videos, k, seed);
  save_folds(path, folds);
  out << "wrote " << folds.size() << " folds to " << path << "\n";
  return kOk;
}

int cmd_train_align(const RunOptions& o, const std::string& out_dir, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const Corpus corpus = Corpus::load(o.corpus);
  const auto folds = load_folds(o.folds);
  save_run_config(out_dir, cfg);
  std::vector<ModelCheckpoint> ckpts(folds.size());
  for_each_fold(static_cast<int>(folds.size()), cfg.jobs, [&](int i) {
    ckpts[i] = train_fold_alignment(corpus, folds[i], cfg);
    const fs::path p = alignment_path(out_dir, folds[i].fold_id);
    fs::create_directories(p.parent_path());
    save_model_checkpoint(p, ckpts[i]);
  });
  for (std::size_t i = 0; i < folds.size(); ++i) {
    out << "fold " << folds[i].fold_id << ": epoch " << ckpts[i].epoch << ", val F1 "
        << ckpts[i].val_f1 << "\n";
  }
  return kOk;
}

int cmd_train_detect(const RunOptions& o, const std::string& input, const std::string& out_dir,
                     std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const Corpus corpus = Corpus::load(o.corpus);
  const auto folds = load_folds(o.folds);
  save_run_config(out_dir, cfg);
  std::vector<bool> variants;
  if (input != "video-only") variants.push_back(false);
  if (input != "text") variants.push_back(true);
  const int n = static_cast<int>(folds.size());
  std::vector<ClassifierCheckpoint> ckpts(folds.size() * variants.size());
  for_each_fold(n, cfg.jobs, [&](int i) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      auto& c = ckpts[i * variants.size() + v];
      c = train_fold_classifier(corpus, folds[i], cfg, variants[v]);
      const fs::path p = classifier_path(out_dir, folds[i].fold_id, variants[v]);
      fs::create_directories(p.parent_path());
      save_classifier_checkpoint(p, c);
    }
  });
  for (int i = 0; i < n; ++i) {
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto& c = ckpts[i * variants.size() + v];
      out << "fold " << folds[i].fold_id << (variants[v] ? " video-only" : " text") << ": epoch "
          << c.epoch << ", val " << c.val_metric << " " << c.val_score << "\n";
    }
  }
  return kOk;
}

int cmd_eval(const std::string& corpus_dir, const std::string& folds_file,
             const std::string& ckpt_dir, const std::string& arm_name_in, int jobs,
             const std::string& out_file, std::ostream& out) {
  const Arm arm = parse_arm(arm_name_in);
  ExperimentConfig cfg = load_run_config(ckpt_dir);
  cfg.arms = {arm};
  cfg.jobs = jobs;
  const auto folds = load_folds(folds_file);
  // Fail on a missing checkpoint before any work is done.
  std::vector<FoldModels> models(folds.size());
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const int id = folds[i].fold_id;
    models[i].fold_id = id;
    if (arm_needs_alignment(arm)) {
      models[i].alignment = load_model_checkpoint(alignment_path(ckpt_dir, id));
    }
    if (arm_needs_text_classifier(arm)) {
      models[i].text = load_classifier_checkpoint(classifier_path(ckpt_dir, id, false));
    }
    if (arm_needs_video_only_classifier(arm)) {
      models[i].video_only = load_classifier_checkpoint(classifier_path(ckpt_dir, id, true));
    }
  }
  const Corpus corpus = Corpus::load(corpus_dir);
  std::map<Arm, std::vector<ArmFoldResult>> results;
  results[arm].resize(folds.size());
  for_each_fold(static_cast<int>(folds.size()), jobs, [&](int i) {
    results[arm][i] = evaluate_fold(corpus, folds[i], models[i], arm, cfg.align.align);
  });
  const ExperimentReport report = make_experiment_report(cfg, folds, results);
  write_text(out_file, to_json(report).dump(2) + "\n");
  const MetricReport& m = report.arms.at(arm).metrics;
  out << "arm " << arm_name(arm) << ": frame F1 " << m.mean_frame.f1;
  if (m.mean_map_average) out << ", mAP " << *m.mean_map_average;
  out << "\n";
  return kOk;
}

std::map<std::string, AnnotatedVideo> load_annotations(const fs::path& p) {
  std::map<std::string, AnnotatedVideo> out;
  if (!fs::exists(p)) throw IoError("annotation path not found: " + p.string());
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      AnnotatedVideo v = load_annotation(f);
      out.emplace(v.video_id, std::move(v));
    }
  } else {
    AnnotatedVideo v = load_annotation(p);
    out.emplace(v.video_id, std::move(v));
  }
  return out;
}

int cmd_agreement(const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const auto a = load_annotations(a_path);
  const auto b = load_annotations(b_path);
  std::vector<std::pair<AnnotatedVideo, AnnotatedVideo>> pairs;
  PairedLabels labels;
  for (const auto& [id, va] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    pairs.emplace_back(va, it->second);
    const PairedLabels p = pair_labels(va, it->second);
    labels.a.insert(labels.a.end(), p.a.begin(), p.a.end());
    labels.b.insert(labels.b.end(), p.b.begin(), p.b.end());
  }
  if (pairs.empty()) throw ValidationError("agreement: the two inputs share no video_id");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "videos %zu\ntiou %.6f\nkappa %.6f\n", pairs.size(),
                aggregate_agreement(pairs), cohens_kappa(labels.a, labels.b));
  out << buf;
  return kOk;
}

int cmd_report(const std::string& in_file, const std::string& out_dir, std::ostream& out) {
  const ExperimentReport report = experiment_report_from_json(read_json_file(in_file));
  if (report.arms.empty()) throw ValidationError("report: no arms in " + in_file);
  fs::create_directories(out_dir);
  for (const auto& [arm, ar] : report.arms) {
    write_text(fs::path(out_dir) / ("metrics_" + std::string(arm_name(arm)) + ".csv"),
               to_csv(ar.metrics));
  }
  // Timelines from the first arm that aligns, else from the oracle arm.
  const ArmReport* source = &report.arms.begin()->second;
  for (const auto& [arm, ar] : report.arms) {
    if (arm_needs_alignment(arm)) {
      source = &ar;
      break;
    }
  }
  for (const auto& v : source->videos) {
    write_text(fs::path(out_dir) / "timelines" / (v.video_id + ".svg"), timeline_svg(v));
  }
  out << "wrote " << report.arms.size() << " tables and " << source->videos.size()
      << " timelines to " << out_dir << "\n";
  return kOk;
}

int cmd_experiment(const RunOptions& o, const std::string& out_file, std::ostream& out) {
  const ExperimentConfig cfg = load_config(o);
  const Corpus corpus = Corpus::load(o.corpus);
  const auto folds = load_folds(o.folds);
  const ExperimentReport report = run_experiment(corpus, folds, cfg);
  write_text(out_file, to_json(report).dump(2) + "\n");
  for (const auto& [arm, ar] : report.arms) {
    out << "arm " << arm_name(arm) << ": frame F1 " << ar.metrics.mean_frame.f1;
    if (ar.metrics.mean_map_average) out << ", mAP " << *ar.metrics.mean_map_average;
    out << "\n";
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Step alignment and mistake detection on procedural videos", "stepalign"};
  app.require_subcommand(1);

  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature corpus");
  synth->add_option("--config", synth_config, "Synth config JSON");
  synth->add_option("--seed", synth_seed, "Corpus seed")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  std::string split_corpus, split_out;
  int split_k = 5;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "Write group k-fold splits");
  split->add_option("--corpus", split_corpus, "Corpus directory")->required();
  split->add_option("--k", split_k, "Number of folds");
  split->add_option("--seed", split_seed, "Split seed")->required();
  split->add_option("--out", split_out, "Output fold file")->required();

  RunOptions align_opts;
  std::string align_out;
  auto* train_align = app.add_subcommand("train-align", "Train the alignment model per fold");
  add_run_options(train_align, align_opts, true);
  train_align->add_option("--out", align_out, "Checkpoint directory")->required();

  RunOptions detect_opts;
  std::string detect_out, detect_input = "both";
  auto* train_detect = app.add_subcommand("train-detect", "Train the mistake classifiers per fold");
  add_run_options(train_detect, detect_opts, true);
  train_detect->add_option("--out", detect_out, "Checkpoint directory")->required();
  train_detect->add_option("--input", detect_input, "Classifier input")
      ->check(CLI::IsMember({"text", "video-only", "both"}));

  std::string eval_corpus, eval_folds, eval_ckpts, eval_arm, eval_out;
  int eval_jobs = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate one arm from saved checkpoints");
  eval->add_option("--corpus", eval_corpus, "Corpus directory")->required();
  eval->add_option("--folds", eval_folds, "Fold file")->required();
  eval->add_option("--ckpts", eval_ckpts, "Checkpoint directory")->required();
  eval->add_option("--arm", eval_arm, "full, oracle or video-only")->required();
  eval->add_option("--jobs", eval_jobs, "Parallel fold workers")->check(CLI::NonNegativeNumber);
  eval->add_option("--out", eval_out, "Report JSON")->required();

  std::string agree_a, agree_b;
  auto* agreement = app.add_subcommand("agreement", "Inter-annotator agreement");
  agreement->add_option("--a", agree_a, "Annotation file or directory")->required();
  agreement->add_option("--b", agree_b, "Annotation file or directory")->required();

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "CSV tables and timeline SVGs from a report");
  report->add_option("--in", report_in, "Report JSON")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  RunOptions exp_opts;
  std::string exp_out;
  auto* experiment = app.add_subcommand("experiment", "Train and evaluate every arm");
  add_run_options(experiment, exp_opts, true);
  experiment->add_option("--out", exp_out, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*synth) return cmd_synth(synth_config, synth_seed, synth_out, out);
    if (*split) return cmd_split(split_corpus, split_k, split_seed, split_out, out);
    if (*train_align) return cmd_train_align(align_opts, align_out, out);
    if (*train_detect) return cmd_train_detect(detect_opts, detect_input, detect_out, out);
    if (*eval) {
      return cmd_eval(eval_corpus, eval_folds, eval_ckpts, eval_arm, eval_jobs, eval_out, out);
    }
    if (*agreement) return cmd_agreement(agree_a, agree_b, out);
    if (*report) return cmd_report(report_in, report_out, out);
    if (*experiment) return cmd_experiment(exp_opts, exp_out, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace stepalign::cli
