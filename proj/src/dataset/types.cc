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

#include "stepalign/dataset/types.h"

#include <set>

#include "stepalign/error.h"

namespace stepalign {

namespace {

constexpr std::array<std::string_view, 5> kTaskNames = {
    "electrical_circuit", "color_mixture", "ionic_reaction", "building_block",
    "cardboard"};

constexpr std::array<std::string_view, 7> kMistakeCodes = {
    "correct", "object", "mispick", "correction", "accident", "howto", "others"};

[[noreturn]] void invalid(const AnnotatedVideo& v, const std::string& rule) {
  throw ValidationError("video '" + v.video_id + "': " + rule);
}

}  // namespace

std::string_view task_name(TaskDomain t) { return kTaskNames[static_cast<int>(t)]; }

TaskDomain parse_task(std::string_view name) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == name) return static_cast<TaskDomain>(i);
  }
  throw ValidationError("unknown task '" + std::string(name) + "'");
}

StepRef StepRef::defined(int step_index) {
  if (step_index < 1) {
    throw ValidationError("step index must be >= 1, got " + std::to_string(step_index));
  }
  return StepRef(step_index);
}

MistakeLabel MistakeLabel::exec(int kind) {
  if (kind < 1 || kind > 6) {
    throw ValidationError("mistake kind must be in 1..6, got " + std::to_string(kind));
  }
  return MistakeLabel(static_cast<MistakeKind>(kind));
}

std::string_view mistake_code(const MistakeLabel& m) {
  return m.is_correct() ? kMistakeCodes[0] : kMistakeCodes[static_cast<int>(m.kind())];
}

MistakeLabel parse_mistake_code(std::string_view code) {
  if (code == kMistakeCodes[0]) return MistakeLabel::correct();
  for (int k = 1; k <= 6; ++k) {
    if (kMistakeCodes[k] == code) return MistakeLabel::exec(k);
  }
  throw ValidationError("unknown mistake code '" + std::string(code) + "'");
}

std::string_view coarse_name(CoarseLabel c) {
  switch (c) {
    case CoarseLabel::kCorrect: return "correct";
    case CoarseLabel::kMistake: return "mistake";
    case CoarseLabel::kCorrection: return "correction";
  }
  return "?";
}

CoarseLabel coarse_label(const MistakeLabel& m) {
  if (m.is_correct()) return CoarseLabel::kCorrect;
  if (m.kind() == MistakeKind::kCorrection) return CoarseLabel::kCorrection;
  return CoarseLabel::kMistake;
}

std::string_view intent_name(RunIntent i) {
  return i == RunIntent::kCorrectRun ? "correct" : "mistake";
}

RunIntent parse_intent(std::string_view s) {
  if (s == "correct") return RunIntent::kCorrectRun;
  if (s == "mistake") return RunIntent::kMistakeRun;
  throw ValidationError("unknown intent '" + std::string(s) + "'");
}

void validate_text(const ProceduralText& t) {
  if (t.steps.empty()) {
    throw ValidationError("procedural text for '" + std::string(task_name(t.task)) +
                          "' has no steps");
  }
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (t.steps[i].empty()) {
      throw ValidationError("procedural text for '" + std::string(task_name(t.task)) +
                            "': step " + std::to_string(i + 1) + " is empty");
    }
  }
}

void validate_video(const AnnotatedVideo& v, const ProceduralText& text) {
  if (v.video_id.empty()) throw ValidationError("video with empty video_id");
  if (v.num_frames < 1) invalid(v, "num_frames must be >= 1");
  if (v.task != text.task) invalid(v, "task does not match procedural text");
  int prev_start = -1;
  for (const auto& s : v.segments) {
    if (s.segment.end <= s.segment.start) invalid(v, "segment empty");
    if (s.segment.start < 0 || s.segment.end > v.num_frames) {
      invalid(v, "segment out of range");
    }
    if (s.segment.start < prev_start) invalid(v, "segments not sorted by start");
    prev_start = s.segment.start;
    if (s.step.is_defined() && s.step.index() > text.num_steps()) {
      invalid(v, "unknown step " + std::to_string(s.step.index()));
    }
    if (s.mistake.is_correct() == s.description.has_value()) {
      invalid(v, "description must be present iff the segment has a mistake label");
    }
  }
}

}  // namespace stepalign
