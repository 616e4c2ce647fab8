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

// Annotation data model: procedural texts, step-aligned segments with
// mistake labels, and the per-video records that bundle them.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stepalign {

enum class TaskDomain : std::uint8_t {
  kElectricalCircuit,
  kColorMixture,
  kIonicReaction,
  kBuildingBlock,
  kCardboard,
};

inline constexpr std::array<TaskDomain, 5> kAllTasks = {
    TaskDomain::kElectricalCircuit, TaskDomain::kColorMixture, TaskDomain::kIonicReaction,
    TaskDomain::kBuildingBlock, TaskDomain::kCardboard};

std::string_view task_name(TaskDomain t);
// Throws ValidationError for unknown names.
TaskDomain parse_task(std::string_view name);

struct ProceduralText {
  TaskDomain task = TaskDomain::kElectricalCircuit;
  // steps[i] is step number i + 1.
  std::vector<std::string> steps;

  int num_steps() const { return static_cast<int>(steps.size()); }
};

// Half-open frame interval [start, end).
struct Segment {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

// Either a 1-based step index or "undefined" (represented by 0).
class StepRef {
 public:
  StepRef() = default;
  static StepRef defined(int step_index);
  static StepRef undefined() { return StepRef(); }

  bool is_defined() const { return index_ > 0; }
  // Precondition: is_defined().
  int index() const { return index_; }

  bool operator==(const StepRef&) const = default;
  auto operator<=>(const StepRef&) const = default;

 private:
  explicit StepRef(int index) : index_(index) {}
  int index_ = 0;
};

// Correct, or one of the six execution-mistake kinds (1..6).
enum class MistakeKind : std::uint8_t {
  kObject = 1,
  kMispick = 2,
  kCorrection = 3,
  kAccident = 4,
  kHowTo = 5,
  kOthers = 6,
};

class MistakeLabel {
 public:
  MistakeLabel() = default;
  static MistakeLabel correct() { return MistakeLabel(); }
  static MistakeLabel exec(MistakeKind kind) { return MistakeLabel(kind); }
  // Throws ValidationError when kind is outside 1..6.
  static MistakeLabel exec(int kind);

  bool is_correct() const { return !kind_.has_value(); }
  // Precondition: !is_correct().
  MistakeKind kind() const { return *kind_; }

  bool operator==(const MistakeLabel&) const = default;

 private:
  explicit MistakeLabel(MistakeKind k) : kind_(k) {}
  std::optional<MistakeKind> kind_;
};

// File codes: "correct", "object", "mispick", "correction", "accident",
// "howto", "others".
std::string_view mistake_code(const MistakeLabel& m);
MistakeLabel parse_mistake_code(std::string_view code);

enum class CoarseLabel : std::uint8_t { kCorrect = 0, kMistake = 1, kCorrection = 2 };

inline constexpr int kNumCoarseLabels = 3;
inline constexpr std::array<CoarseLabel, 3> kAllCoarseLabels = {
    CoarseLabel::kCorrect, CoarseLabel::kMistake, CoarseLabel::kCorrection};

std::string_view coarse_name(CoarseLabel c);

// Correct -> Correct, correction -> Correction, every other kind -> Mistake.
CoarseLabel coarse_label(const MistakeLabel& m);

struct AnnotatedSegment {
  Segment segment;
  StepRef step;
  MistakeLabel mistake;
  // Present iff mistake is not Correct.
  std::optional<std::string> description;

  bool operator==(const AnnotatedSegment&) const = default;
};

enum class RunIntent : std::uint8_t { kCorrectRun, kMistakeRun };

std::string_view intent_name(RunIntent i);
RunIntent parse_intent(std::string_view s);

struct AnnotatedVideo {
  std::string video_id;
  std::string worker_id;
  TaskDomain task = TaskDomain::kElectricalCircuit;
  RunIntent intent = RunIntent::kCorrectRun;
  int num_frames = 1;
  // Sorted ascending by start.
  std::vector<AnnotatedSegment> segments;

  bool operator==(const AnnotatedVideo&) const = default;
};

// Checks every AnnotatedVideo invariant against its procedural text. Throws
// ValidationError naming the video and the violated rule.
void validate_video(const AnnotatedVideo& v, const ProceduralText& text);
void validate_text(const ProceduralText& t);

struct FoldSpec {
  int fold_id = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  bool operator==(const FoldSpec&) const = default;
};

}  // namespace stepalign
