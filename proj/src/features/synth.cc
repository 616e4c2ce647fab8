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

#include "stepalign/features/synth.h"

#include <cmath>
#include <random>
#include <string>

#include "stepalign/error.h"
#include "stepalign/features/feature_io.h"
#include "stepalign/features/vector_ops.h"
#include "stepalign/simd/kernels.h"

namespace stepalign {

namespace {

using Vec = std::vector<double>;

constexpr int kPrototypeRetries = 2000;
constexpr int kBackgroundRetries = 200;
constexpr double kMaxPrototypeCosine = 0.5;
constexpr double kMaxBackgroundCosine = 0.2;

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  double n = 0.0;
  do {
    for (double& x : v) x = g(rng);
    n = norm(v);
  } while (n == 0.0);
  simd::scale(1.0 / n, v);
  return v;
}

Vec normalized(Vec v) {
  const double n = norm(v);
  if (n == 0.0) throw ValidationError("synth: degenerate zero vector");
  simd::scale(1.0 / n, v);
  return v;
}

Vec blend(const Vec& base, const Vec& dir, double weight) {
  Vec v = base;
  simd::axpy(weight, dir, v);
  return normalized(std::move(v));
}

int draw(std::mt19937_64& rng, IntRange r) {
  return std::uniform_int_distribution<int>(r.lo, r.hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string("synth config: ") + name + " must be in [0, 1]");
  }
}

void check_range(IntRange r, int min_lo, const char* name) {
  if (r.lo < min_lo || r.hi < r.lo) {
    throw ValidationError(std::string("synth config: range ") + name + " is invalid");
  }
}

struct TaskModel {
  TaskDomain task;
  std::vector<Vec> prototypes;
  std::vector<Vec> flipped;  // prototypes with the attribute sign reversed
  Vec background;
};

class VideoBuilder {
 public:
  VideoBuilder(const TaskModel& model, const std::array<Vec, 7>& signatures,
               const SynthConfig& cfg, std::mt19937_64& rng)
      : model_(model), signatures_(signatures), cfg_(cfg), rng_(rng) {}

  void gap() { gap(draw(rng_, cfg_.background_gap)); }

  void gap(int n) {
    for (int i = 0; i < n; ++i) {
      Vec f;
      for (int attempt = 0;; ++attempt) {
        f = with_noise(blend(model_.background, random_unit(rng_, cfg_.dim), cfg_.background_mix));
        if (far_from_prototypes(f)) break;
        if (attempt >= kBackgroundRetries) {
          throw ValidationError("synth: cannot draw background frames far from prototypes");
        }
      }
      frames_.push_back(std::move(f));
    }
  }

  // Emits `len` frames around `center` and records one annotated segment.
  void segment(const Vec& center, int len, StepRef step, MistakeLabel label,
               std::optional<std::string> description) {
    const int start = static_cast<int>(frames_.size());
    for (int i = 0; i < len; ++i) frames_.push_back(with_noise(center));
    segments_.push_back({{start, start + len}, step, label, std::move(description)});
  }

  // A segment of step `step` whose content is `center`, possibly split in two.
  void step_segment(const Vec& center, int len, int step, MistakeLabel label,
                    const std::optional<std::string>& description, bool split) {
    if (split && len >= 2) {
      const int first = std::uniform_int_distribution<int>(1, len - 1)(rng_);
      segment(center, first, StepRef::defined(step), label, description);
      gap(std::max(1, draw(rng_, cfg_.background_gap)));
      segment(center, len - first, StepRef::defined(step), label, description);
    } else {
      segment(center, len, StepRef::defined(step), label, description);
    }
  }

  int num_frames() const { return static_cast<int>(frames_.size()); }
  std::vector<AnnotatedSegment> take_segments() { return std::move(segments_); }

  Matrix take_frames() {
    Matrix m(frames_.size(), cfg_.dim);
    for (std::size_t r = 0; r < frames_.size(); ++r) {
      std::copy(frames_[r].begin(), frames_[r].end(), m.row(r).begin());
    }
    return round_to_float32(std::move(m));
  }

 private:
  Vec with_noise(const Vec& v) {
    Vec f = v;
    if (cfg_.noise_sigma > 0.0) {
      std::normal_distribution<double> g(0.0, cfg_.noise_sigma);
      for (double& x : f) x += g(rng_);
    }
    return f;
  }

  bool far_from_prototypes(const Vec& f) const {
    for (const auto& p : model_.prototypes) {
      if (cosine(f, p) >= kMaxBackgroundCosine) return false;
    }
    return true;
  }

  const TaskModel& model_;
  const std::array<Vec, 7>& signatures_;
  const SynthConfig& cfg_;
  std::mt19937_64& rng_;
  std::vector<Vec> frames_;
  std::vector<AnnotatedSegment> segments_;
};

// Step slots of all tasks in task-major order. Slot i shares its base with
// slot i + n/2 when the two belong to different tasks; the pair takes
// opposite attribute signs, so one step with its sign flipped looks exactly
// like a correct step of another task.
struct SharedBases {
  std::vector<int> base_of;
  std::vector<int> twin;  // -1 when unpaired
  int num_bases = 0;
};

SharedBases share_bases(const SynthConfig& cfg) {
  std::vector<int> task_of;
  for (int t = 0; t < cfg.tasks; ++t) {
    task_of.insert(task_of.end(), cfg.steps_per_task[t % cfg.steps_per_task.size()], t);
  }
  const int n = static_cast<int>(task_of.size());
  const int half = n / 2;
  SharedBases s;
  s.base_of.assign(n, -1);
  s.twin.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (s.base_of[i] >= 0) continue;
    s.base_of[i] = s.num_bases;
    const int j = i + half;
    if (i < half && task_of[i] != task_of[j]) {
      s.base_of[j] = s.num_bases;
      s.twin[i] = j;
      s.twin[j] = i;
    }
    ++s.num_bases;
  }
  return s;
}

int draw_kind(std::mt19937_64& rng, const std::array<double, 6>& weights) {
  std::discrete_distribution<int> d(weights.begin(), weights.end());
  return d(rng) + 1;
}

std::string describe(int kind, int step) {
  static const char* const kWhat[] = {"", "wrong object used", "grasped and released unused object",
                                      "redid the step", "unintended action",
                                      "wrong way of working", "other deviation"};
  return std::string(kWhat[kind]) + " in step " + std::to_string(step);
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.tasks < 1 || cfg.tasks > 5) throw ValidationError("synth config: tasks must be 1..5");
  if (cfg.videos_per_task < 1) throw ValidationError("synth config: videos_per_task >= 1");
  if (cfg.workers < 1) throw ValidationError("synth config: workers >= 1");
  if (cfg.dim < 2) throw ValidationError("synth config: dim >= 2");
  if (cfg.steps_per_task.empty()) throw ValidationError("synth config: steps_per_task empty");
  for (int k : cfg.steps_per_task) {
    if (k < 1) throw ValidationError("synth config: every task needs >= 1 step");
  }
  check_range(cfg.frames_per_step, 1, "frames_per_step");
  check_range(cfg.background_gap, 0, "background_gap");
  check_range(cfg.extra_segment, 1, "extra_segment");
  if (!(cfg.noise_sigma >= 0.0)) throw ValidationError("synth config: noise_sigma >= 0");
  check_prob(cfg.p_skip, "p_skip");
  check_prob(cfg.p_swap, "p_swap");
  check_prob(cfg.p_split, "p_split");
  check_prob(cfg.p_exec_mistake, "p_exec_mistake");
  check_prob(cfg.correct_run_mistake_scale, "correct_run_mistake_scale");
  double wsum = 0.0;
  for (double w : cfg.kind_weights) {
    if (!(w >= 0.0)) throw ValidationError("synth config: kind weights must be >= 0");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw ValidationError("synth config: kind weights sum to zero");
  if (!(cfg.perturb_strength > 0.0)) throw ValidationError("synth config: perturb_strength > 0");
  if (!(cfg.background_mix >= 0.0)) throw ValidationError("synth config: background_mix >= 0");
  // Below 1 the prototypes of one task keep pairwise cosine under 0.5.
  if (!(cfg.attribute_weight >= 0.0 && cfg.attribute_weight < 1.0)) {
    throw ValidationError("synth config: attribute_weight must be in [0, 1)");
  }
  if (share_bases(cfg).num_bases + 1 > cfg.dim) {
    throw ValidationError("synth config: dim too small for orthogonal step prototypes");
  }
}

nlohmann::json to_json(const SynthConfig& c) {
  return {{"tasks", c.tasks},
          {"videos_per_task", c.videos_per_task},
          {"workers", c.workers},
          {"dim", c.dim},
          {"steps_per_task", c.steps_per_task},
          {"frames_per_step", {c.frames_per_step.lo, c.frames_per_step.hi}},
          {"background_gap", {c.background_gap.lo, c.background_gap.hi}},
          {"extra_segment", {c.extra_segment.lo, c.extra_segment.hi}},
          {"noise_sigma", c.noise_sigma},
          {"p_skip", c.p_skip},
          {"p_swap", c.p_swap},
          {"p_split", c.p_split},
          {"p_exec_mistake", c.p_exec_mistake},
          {"correct_run_mistake_scale", c.correct_run_mistake_scale},
          {"kind_weights", c.kind_weights},
          {"perturb_strength", c.perturb_strength},
          {"background_mix", c.background_mix},
          {"attribute_weight", c.attribute_weight},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  SynthConfig c;
  auto range = [&](const char* key, IntRange& r) {
    if (!j.contains(key)) return;
    const auto a = j.at(key).get<std::vector<int>>();
    if (a.size() != 2) throw ValidationError(std::string("synth config: ") + key + " needs [lo, hi]");
    r = {a[0], a[1]};
  };
  try {
    c.tasks = j.value("tasks", c.tasks);
    c.videos_per_task = j.value("videos_per_task", c.videos_per_task);
    c.workers = j.value("workers", c.workers);
    c.dim = j.value("dim", c.dim);
    c.steps_per_task = j.value("steps_per_task", c.steps_per_task);
    range("frames_per_step", c.frames_per_step);
    range("background_gap", c.background_gap);
    range("extra_segment", c.extra_segment);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.p_skip = j.value("p_skip", c.p_skip);
    c.p_swap = j.value("p_swap", c.p_swap);
    c.p_split = j.value("p_split", c.p_split);
    c.p_exec_mistake = j.value("p_exec_mistake", c.p_exec_mistake);
    c.correct_run_mistake_scale = j.value("correct_run_mistake_scale", c.correct_run_mistake_scale);
    c.kind_weights = j.value("kind_weights", c.kind_weights);
    c.perturb_strength = j.value("perturb_strength", c.perturb_strength);
    c.background_mix = j.value("background_mix", c.background_mix);
    c.attribute_weight = j.value("attribute_weight", c.attribute_weight);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  validate(c);
  return c;
}

SynthCorpus synth_corpus(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);

  // Signatures of the kinds realized as extra segments, indexed by kind.
  std::array<Vec, 7> signatures;
  for (int k : {2, 3, 6}) signatures[k] = random_unit(rng, cfg.dim);
  const Vec attribute = random_unit(rng, cfg.dim);

  // Orthonormal bases, all orthogonal to the attribute axis.
  const SharedBases shared = share_bases(cfg);
  std::vector<Vec> bases;
  for (int b = 0; b < shared.num_bases; ++b) {
    Vec v;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kPrototypeRetries) {
        throw ValidationError("synth: cannot draw " + std::to_string(shared.num_bases) +
                              " orthogonal prototypes in dim " + std::to_string(cfg.dim));
      }
      v = random_unit(rng, cfg.dim);
      simd::axpy(-simd::dot(v, attribute), attribute, v);
      for (const auto& u : bases) simd::axpy(-simd::dot(v, u), u, v);
      const double n = norm(v);
      if (n < 1e-6) continue;
      simd::scale(1.0 / n, v);
      break;
    }
    bases.push_back(std::move(v));
  }
  // Twins take opposite signs.
  std::vector<double> signs(shared.base_of.size());
  for (std::size_t i = 0; i < signs.size(); ++i) {
    const int twin = shared.twin[i];
    signs[i] = twin >= 0 && twin < static_cast<int>(i) ? -signs[twin]
                                                       : (chance(rng, 0.5) ? 1.0 : -1.0);
  }
  std::vector<int> first_slot;
  for (int t = 0, n = 0; t < cfg.tasks; ++t) {
    first_slot.push_back(n);
    n += cfg.steps_per_task[t % cfg.steps_per_task.size()];
  }

  SynthCorpus out;
  std::vector<TaskModel> models;
  for (int t = 0; t < cfg.tasks; ++t) {
    TaskModel m;
    m.task = kAllTasks[t];
    const int num_steps = cfg.steps_per_task[t % cfg.steps_per_task.size()];
    for (int k = 0; k < num_steps; ++k) {
      const int slot = first_slot[t] + k;
      const Vec& base = bases[shared.base_of[slot]];
      m.prototypes.push_back(blend(base, attribute, signs[slot] * cfg.attribute_weight));
      m.flipped.push_back(blend(base, attribute, -signs[slot] * cfg.attribute_weight));
      for (int j = 0; j < k; ++j) {
        if (simd::dot(m.prototypes[k], m.prototypes[j]) >= kMaxPrototypeCosine) {
          throw ValidationError("synth: cannot separate the prototypes of task " +
                                std::to_string(t));
        }
      }
    }
    // Background sits opposite the prototype mean so that it is dissimilar
    // to every step.
    Vec mean(cfg.dim, 0.0);
    for (const auto& p : m.prototypes) simd::add(p, mean);
    m.background = norm(mean) > 1e-9 ? normalized(mean) : random_unit(rng, cfg.dim);
    simd::scale(-1.0, m.background);

    ProceduralText text;
    text.task = m.task;
    Matrix steps(num_steps, cfg.dim);
    for (int k = 0; k < num_steps; ++k) {
      text.steps.push_back("step " + std::to_string(k + 1) + " of " +
                           std::string(task_name(m.task)));
      std::copy(m.prototypes[k].begin(), m.prototypes[k].end(), steps.row(k).begin());
    }
    out.annotations.texts.push_back(std::move(text));
    out.step_features.emplace(m.task, FeatureMatrix(round_to_float32(std::move(steps))));
    models.push_back(std::move(m));
  }

  const int n_correct = (cfg.videos_per_task + 1) / 2;
  for (int t = 0; t < cfg.tasks; ++t) {
    const TaskModel& model = models[t];
    const int num_steps = static_cast<int>(model.prototypes.size());
    for (int v = 0; v < cfg.videos_per_task; ++v) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                        static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(v)};
      std::mt19937_64 vrng(seq);

      AnnotatedVideo video;
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%02d", std::string(task_name(model.task)).c_str(), v);
      video.video_id = id;
      video.task = model.task;
      video.intent = v < n_correct ? RunIntent::kCorrectRun : RunIntent::kMistakeRun;
      const int within = v < n_correct ? v : v - n_correct;
      video.worker_id = "worker_" + std::to_string(within % cfg.workers);
      const double scale =
          video.intent == RunIntent::kMistakeRun ? 1.0 : cfg.correct_run_mistake_scale;

      SynthPlan plan;
      plan.video_id = video.video_id;
      std::vector<int> order;
      for (int k = 1; k <= num_steps; ++k) {
        ++plan.skip_trials;
        if (chance(vrng, cfg.p_skip * scale)) {
          plan.skipped.push_back(k);
        } else {
          order.push_back(k);
        }
      }
      for (std::size_t i = 0; i + 1 < order.size();) {
        ++plan.swap_trials;
        if (chance(vrng, cfg.p_swap * scale)) {
          plan.swapped.emplace_back(order[i], order[i + 1]);
          std::swap(order[i], order[i + 1]);
          i += 2;
        } else {
          i += 1;
        }
      }
      plan.executed_order = order;

      VideoBuilder b(model, signatures, cfg, vrng);
      b.gap();
      for (int step : order) {
        const Vec& proto = model.prototypes[step - 1];
        ++plan.exec_trials;
        const int kind = chance(vrng, cfg.p_exec_mistake * scale)
                             ? draw_kind(vrng, cfg.kind_weights)
                             : 0;
        ++plan.split_trials;
        const bool split = chance(vrng, cfg.p_split * scale);
        if (split) plan.split.push_back(step);
        if (kind != 0) plan.exec_mistakes.emplace_back(step, kind);
        const int len = draw(vrng, cfg.frames_per_step);

        switch (kind) {
          case 0:
            b.step_segment(proto, len, step, MistakeLabel::correct(), std::nullopt, split);
            break;
          case 1: {
            // Another step's content where this step was intended.
            int other = step;
            if (num_steps > 1) {
              other = std::uniform_int_distribution<int>(1, num_steps - 1)(vrng);
              if (other >= step) ++other;
            }
            b.step_segment(model.prototypes[other - 1], len, step, MistakeLabel::exec(1),
                           describe(1, step), split);
            break;
          }
          case 4:
          case 5:
            b.step_segment(model.flipped[step - 1], len, step, MistakeLabel::exec(kind),
                           describe(kind, step), split);
            break;
          case 3:
            b.step_segment(model.flipped[step - 1], len, step, MistakeLabel::exec(5),
                           describe(5, step), split);
            b.gap(std::max(1, draw(vrng, cfg.background_gap)));
            b.segment(blend(proto, signatures[3], cfg.perturb_strength),
                      draw(vrng, cfg.frames_per_step), StepRef::defined(step),
                      MistakeLabel::exec(3), describe(3, step));
            break;
          case 2:
          case 6:
            b.step_segment(proto, len, step, MistakeLabel::correct(), std::nullopt, split);
            b.gap(std::max(1, draw(vrng, cfg.background_gap)));
            b.segment(blend(model.background, signatures[kind], cfg.perturb_strength),
                      draw(vrng, cfg.extra_segment), StepRef::undefined(),
                      MistakeLabel::exec(kind), describe(kind, step));
            break;
        }
        b.gap();
      }
      if (b.num_frames() == 0) b.gap(1);

      video.num_frames = b.num_frames();
      video.segments = b.take_segments();
      validate_video(video, out.annotations.texts[t]);
      out.video_features.emplace(video.video_id, FeatureMatrix(b.take_frames()));
      out.annotations.videos.push_back(std::move(video));
      out.plans.push_back(std::move(plan));
    }
  }
  std::sort(out.annotations.videos.begin(), out.annotations.videos.end(),
            [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  return out;
}

void save_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  save_corpus(dir, corpus.annotations);
  for (const auto& [id, m] : corpus.video_features) {
    write_features(m, dir / "features" / (id + ".fmtx"), id);
  }
  for (const auto& [task, m] : corpus.step_features) {
    const std::string name(task_name(task));
    write_features(m, dir / "step_features" / (name + ".fmtx"), name);
  }
  nlohmann::json plans = nlohmann::json::array();
  for (const auto& p : corpus.plans) {
    plans.push_back({{"video_id", p.video_id},
                     {"executed_order", p.executed_order},
                     {"skipped", p.skipped},
                     {"swapped", p.swapped},
                     {"split", p.split},
                     {"exec_mistakes", p.exec_mistakes}});
  }
  write_json_file(dir / "plans.json", plans);
}

}  // namespace stepalign
