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

// Binary feature files. Layout (little-endian):
//   bytes 0..3   magic "FMTX"
//   bytes 4..7   u32 rows
//   bytes 8..11  u32 dim
//   bytes 12..15 reserved, zero
//   rows * dim float32, row-major
// Every .fmtx file has a JSON sidecar next to it (same stem, .json):
//   {"video_id": ..., "rows": ..., "dim": ...}

#include <filesystem>
#include <string>

#include "stepalign/error.h"
#include "stepalign/features/feature_matrix.h"

namespace stepalign {

class FeatureFileError : public ParseError {
 public:
  enum class Kind { kBadMagic, kTruncated, kNonFinite, kHeaderMismatch };
  FeatureFileError(Kind kind, const std::string& file, const std::string& what)
      : ParseError(file, 0, what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::filesystem::path sidecar_path(const std::filesystem::path& fmtx);

void write_features(const FeatureMatrix& m, const std::filesystem::path& path,
                    const std::string& id);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace stepalign
