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

#include "stepalign/features/feature_io.h"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "stepalign/dataset/corpus_io.h"

namespace stepalign {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files are written with native little-endian stores");

constexpr std::array<char, 4> kMagic = {'F', 'M', 'T', 'X'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::vector<char>& out, std::size_t at, std::uint32_t v) {
  std::memcpy(out.data() + at, &v, 4);
}

std::uint32_t get_u32(const std::vector<char>& in, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, in.data() + at, 4);
  return v;
}

}  // namespace

fs::path sidecar_path(const fs::path& fmtx) {
  fs::path p = fmtx;
  p.replace_extension(".json");
  return p;
}

void write_features(const FeatureMatrix& m, const fs::path& path, const std::string& id) {
  const std::size_t n = m.rows() * m.dim();
  std::vector<char> buf(kHeaderBytes + 4 * n, 0);
  std::memcpy(buf.data(), kMagic.data(), 4);
  put_u32(buf, 4, static_cast<std::uint32_t>(m.rows()));
  put_u32(buf, 8, static_cast<std::uint32_t>(m.dim()));
  const auto flat = m.values().flat();
  for (std::size_t i = 0; i < n; ++i) {
    const float f = static_cast<float>(flat[i]);
    std::memcpy(buf.data() + kHeaderBytes + 4 * i, &f, 4);
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
  write_json_file(sidecar_path(path),
                  {{"video_id", id}, {"rows", m.rows()}, {"dim", m.dim()}});
}

FeatureMatrix read_features(const fs::path& path) {
  using Kind = FeatureFileError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string file = path.string();
  if (buf.size() < kHeaderBytes) {
    throw FeatureFileError(Kind::kTruncated, file, "truncated: header incomplete");
  }
  if (std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
    throw FeatureFileError(Kind::kBadMagic, file, "bad magic, expected FMTX");
  }
  const std::uint32_t rows = get_u32(buf, 4);
  const std::uint32_t dim = get_u32(buf, 8);

  const auto side = read_json_file(sidecar_path(path));
  const auto side_rows = side.value("rows", -1L);
  const auto side_dim = side.value("dim", -1L);
  if (side_rows != static_cast<long>(rows) || side_dim != static_cast<long>(dim)) {
    throw FeatureFileError(Kind::kHeaderMismatch, file,
                           "header mismatch: file says " + std::to_string(rows) + "x" +
                               std::to_string(dim) + ", sidecar says " +
                               std::to_string(side_rows) + "x" + std::to_string(side_dim));
  }
  if (rows == 0 || dim == 0) {
    throw FeatureFileError(Kind::kHeaderMismatch, file, "header mismatch: empty shape");
  }
  const std::size_t n = static_cast<std::size_t>(rows) * dim;
  if (buf.size() < kHeaderBytes + 4 * n) {
    throw FeatureFileError(Kind::kTruncated, file,
                           "truncated: expected " + std::to_string(4 * n) +
                               " payload bytes, found " +
                               std::to_string(buf.size() - kHeaderBytes));
  }
  if (buf.size() > kHeaderBytes + 4 * n) {
    throw FeatureFileError(Kind::kHeaderMismatch, file,
                           "header mismatch: trailing bytes after payload");
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, buf.data() + kHeaderBytes + 4 * i, 4);
    if (!std::isfinite(f)) {
      throw FeatureFileError(Kind::kNonFinite, file,
                             "non-finite value at element " + std::to_string(i));
    }
    data[i] = f;
  }
  return FeatureMatrix(Matrix(rows, dim, std::move(data)));
}

}  // namespace stepalign
