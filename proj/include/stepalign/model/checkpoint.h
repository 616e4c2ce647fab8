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

// Checkpoint files: a little-endian u32 header length, a JSON header of that
// many bytes, then every tensor as row-major little-endian float32 in the
// order listed under the header's "tensors" key ({name, rows, cols}).

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "stepalign/model/params.h"

namespace stepalign {

struct TensorFile {
  nlohmann::json header;  // without the "tensors" key
  std::vector<std::pair<std::string, Matrix>> tensors;
};

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file);
// Missing file -> IoError; malformed content -> ParseError.
TensorFile read_tensor_file(const std::filesystem::path& path);

struct ModelCheckpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  int epoch = 0;
  double val_f1 = 0.0;
  // Free-form settings needed to reuse the model (alignment options).
  nlohmann::json settings = nlohmann::json::object();
};

void save_model_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& ckpt);
ModelCheckpoint load_model_checkpoint(const std::filesystem::path& path);

}  // namespace stepalign
