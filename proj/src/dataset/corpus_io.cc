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

#include "stepalign/dataset/corpus_io.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "stepalign/error.h"

namespace stepalign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& source) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(source, 0, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(source, 0, std::string("field '") + key + "': " + e.what());
  }
}

std::vector<std::string> sorted_json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("missing directory " + dir.string());
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

json to_json(const ProceduralText& t) {
  return json{{"task", task_name(t.task)}, {"steps", t.steps}};
}

json to_json(const AnnotatedVideo& v) {
  json segs = json::array();
  for (const auto& s : v.segments) {
    json js{{"start", s.segment.start},
            {"end", s.segment.end},
            {"mistake", mistake_code(s.mistake)}};
    if (s.step.is_defined()) {
      js["step"] = s.step.index();
    } else {
      js["step"] = "undefined";
    }
    if (s.description) js["description"] = *s.description;
    segs.push_back(std::move(js));
  }
  return json{{"video_id", v.video_id},     {"worker_id", v.worker_id},
              {"task", task_name(v.task)},  {"intent", intent_name(v.intent)},
              {"num_frames", v.num_frames}, {"segments", std::move(segs)}};
}

json to_json(const std::vector<FoldSpec>& folds) {
  json arr = json::array();
  for (const auto& f : folds) {
    arr.push_back(
        {{"fold_id", f.fold_id}, {"train", f.train}, {"val", f.val}, {"test", f.test}});
  }
  return arr;
}

ProceduralText text_from_json(const json& j, const std::string& source) {
  ProceduralText t;
  try {
    t.task = parse_task(get_field<std::string>(j, "task", source));
  } catch (const ValidationError& e) {
    throw ParseError(source, 0, e.what());
  }
  t.steps = get_field<std::vector<std::string>>(j, "steps", source);
  return t;
}

AnnotatedVideo video_from_json(const json& j, const std::string& source) {
  AnnotatedVideo v;
  v.video_id = get_field<std::string>(j, "video_id", source);
  v.worker_id = get_field<std::string>(j, "worker_id", source);
  try {
    v.task = parse_task(get_field<std::string>(j, "task", source));
    v.intent = parse_intent(get_field<std::string>(j, "intent", source));
  } catch (const ValidationError& e) {
    throw ParseError(source, 0, e.what());
  }
  v.num_frames = get_field<int>(j, "num_frames", source);
  const json segs = get_field<json>(j, "segments", source);
  if (!segs.is_array()) throw ParseError(source, 0, "'segments' must be an array");
  for (const auto& js : segs) {
    AnnotatedSegment s;
    s.segment.start = get_field<int>(js, "start", source);
    s.segment.end = get_field<int>(js, "end", source);
    const json& step = js.contains("step") ? js.at("step") : json();
    if (step.is_number_integer()) {
      try {
        s.step = StepRef::defined(step.get<int>());
      } catch (const ValidationError& e) {
        throw ParseError(source, 0, e.what());
      }
    } else if (step.is_string() && step.get<std::string>() == "undefined") {
      s.step = StepRef::undefined();
    } else {
      throw ParseError(source, 0, "segment 'step' must be an integer or \"undefined\"");
    }
    try {
      s.mistake = parse_mistake_code(get_field<std::string>(js, "mistake", source));
    } catch (const ValidationError& e) {
      throw ParseError(source, 0, e.what());
    }
    if (js.contains("description")) {
      s.description = get_field<std::string>(js, "description", source);
    }
    v.segments.push_back(std::move(s));
  }
  return v;
}

std::vector<FoldSpec> folds_from_json(const json& j, const std::string& source) {
  if (!j.is_array()) throw ParseError(source, 0, "fold file must be a JSON list");
  std::vector<FoldSpec> folds;
  for (const auto& jf : j) {
    FoldSpec f;
    f.fold_id = get_field<int>(jf, "fold_id", source);
    f.train = get_field<std::vector<std::string>>(jf, "train", source);
    f.val = get_field<std::vector<std::string>>(jf, "val", source);
    f.test = get_field<std::vector<std::string>>(jf, "test", source);
    folds.push_back(std::move(f));
  }
  return folds;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), line_of_offset(text, e.byte), e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

const ProceduralText& AnnotationCorpus::text_for(TaskDomain task) const {
  for (const auto& t : texts) {
    if (t.task == task) return t;
  }
  throw ValidationError("no procedural text for task '" + std::string(task_name(task)) +
                        "'");
}

const AnnotatedVideo& AnnotationCorpus::video(const std::string& video_id) const {
  auto it = std::lower_bound(
      videos.begin(), videos.end(), video_id,
      [](const AnnotatedVideo& v, const std::string& id) { return v.video_id < id; });
  if (it == videos.end() || it->video_id != video_id) {
    throw ValidationError("unknown video_id '" + video_id + "'");
  }
  return *it;
}

AnnotatedVideo load_annotation(const fs::path& file) {
  return video_from_json(read_json_file(file), file.string());
}

AnnotationCorpus load_corpus(const fs::path& dir) {
  AnnotationCorpus c;
  for (const auto& f : sorted_json_files(dir / "texts")) {
    c.texts.push_back(text_from_json(read_json_file(f), f));
    validate_text(c.texts.back());
  }
  std::sort(c.texts.begin(), c.texts.end(),
            [](const auto& a, const auto& b) { return a.task < b.task; });
  for (std::size_t i = 1; i < c.texts.size(); ++i) {
    if (c.texts[i].task == c.texts[i - 1].task) {
      throw ValidationError("duplicate procedural text for task '" +
                            std::string(task_name(c.texts[i].task)) + "'");
    }
  }
  for (const auto& f : sorted_json_files(dir / "annotations")) {
    c.videos.push_back(load_annotation(f));
  }
  std::sort(c.videos.begin(), c.videos.end(),
            [](const auto& a, const auto& b) { return a.video_id < b.video_id; });
  for (std::size_t i = 0; i < c.videos.size(); ++i) {
    if (i > 0 && c.videos[i].video_id == c.videos[i - 1].video_id) {
      throw ValidationError("duplicate video_id '" + c.videos[i].video_id + "'");
    }
    validate_video(c.videos[i], c.text_for(c.videos[i].task));
  }
  return c;
}

void save_corpus(const fs::path& dir, const AnnotationCorpus& corpus) {
  for (const auto& t : corpus.texts) {
    write_json_file(dir / "texts" / (std::string(task_name(t.task)) + ".json"), to_json(t));
  }
  for (const auto& v : corpus.videos) {
    write_json_file(dir / "annotations" / (v.video_id + ".json"), to_json(v));
  }
}

std::vector<FoldSpec> load_folds(const fs::path& file) {
  return folds_from_json(read_json_file(file), file.string());
}

void save_folds(const fs::path& file, const std::vector<FoldSpec>& folds) {
  write_json_file(file, to_json(folds));
}

}  // namespace stepalign
