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

// JSON (de)serialization for annotations, procedural texts and fold files.
//
// Corpus directory layout:
//   <dir>/texts/<task>.json           {task, steps: ["...", ...]}
//   <dir>/annotations/<video_id>.json {video_id, worker_id, task, intent,
//                                      num_frames, segments: [...]}

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepalign/dataset/types.h"

namespace stepalign {

nlohmann::json to_json(const ProceduralText& t);
nlohmann::json to_json(const AnnotatedVideo& v);
nlohmann::json to_json(const std::vector<FoldSpec>& folds);

// `source` names the originating file for error messages.
ProceduralText text_from_json(const nlohmann::json& j, const std::string& source);
AnnotatedVideo video_from_json(const nlohmann::json& j, const std::string& source);
std::vector<FoldSpec> folds_from_json(const nlohmann::json& j, const std::string& source);

// Parses a JSON file; syntax errors become ParseError with the line number.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

struct AnnotationCorpus {
  std::vector<ProceduralText> texts;  // sorted by task
  std::vector<AnnotatedVideo> videos;  // sorted by video_id

  const ProceduralText& text_for(TaskDomain task) const;
  const AnnotatedVideo& video(const std::string& video_id) const;
};

// Loads and validates every annotation against its task's text.
AnnotationCorpus load_corpus(const std::filesystem::path& dir);
void save_corpus(const std::filesystem::path& dir, const AnnotationCorpus& corpus);

AnnotatedVideo load_annotation(const std::filesystem::path& file);

std::vector<FoldSpec> load_folds(const std::filesystem::path& file);
void save_folds(const std::filesystem::path& file, const std::vector<FoldSpec>& folds);

}  // namespace stepalign
