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

#include "stepalign/model/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "stepalign/error.h"

namespace stepalign {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written with native little-endian stores");

void write_tensor_file(const fs::path& path, const TensorFile& file) {
  nlohmann::json header = file.header;
  header["tensors"] = nlohmann::json::array();
  std::size_t n = 0;
  for (const auto& [name, m] : file.tensors) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    n += m.size();
  }
  const std::string text = header.dump();
  const auto len = static_cast<std::uint32_t>(text.size());
  std::vector<char> buf(4 + text.size() + 4 * n);
  std::memcpy(buf.data(), &len, 4);
  std::memcpy(buf.data() + 4, text.data(), text.size());
  std::size_t at = 4 + text.size();
  for (const auto& [name, m] : file.tensors) {
    for (double x : m.flat()) {
      const float f = static_cast<float>(x);
      std::memcpy(buf.data() + at, &f, 4);
      at += 4;
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

TensorFile read_tensor_file(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string file = path.string();
  if (buf.size() < 4) throw ParseError(file, 0, "truncated checkpoint header");
  std::uint32_t len;
  std::memcpy(&len, buf.data(), 4);
  if (buf.size() < 4 + static_cast<std::size_t>(len)) {
    throw ParseError(file, 0, "truncated checkpoint header");
  }
  TensorFile out;
  try {
    out.header = nlohmann::json::parse(buf.begin() + 4, buf.begin() + 4 + len);
    std::size_t at = 4 + len;
    for (const auto& t : out.header.at("tensors")) {
      const auto rows = t.at("rows").get<std::size_t>();
      const auto cols = t.at("cols").get<std::size_t>();
      if (buf.size() < at + 4 * rows * cols) {
        throw ParseError(file, 0, "truncated tensor data");
      }
      std::vector<double> data(rows * cols);
      for (double& x : data) {
        float f;
        std::memcpy(&f, buf.data() + at, 4);
        at += 4;
        if (!std::isfinite(f)) throw ParseError(file, 0, "non-finite tensor value");
        x = f;
      }
      out.tensors.emplace_back(t.at("name").get<std::string>(),
                               Matrix(rows, cols, std::move(data)));
    }
    if (at != buf.size()) throw ParseError(file, 0, "trailing bytes after tensor data");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file, 0, std::string("bad checkpoint header: ") + e.what());
  }
  out.header.erase("tensors");
  return out;
}

void save_model_checkpoint(const fs::path& path, const ModelCheckpoint& ckpt) {
  check_shapes(ckpt.params);
  TensorFile f;
  f.header = {{"U", ckpt.params.shape.num_queries},
              {"d", ckpt.params.shape.dim},
              {"d_prime", ckpt.params.shape.d_prime},
              {"seed", ckpt.seed},
              {"epoch", ckpt.epoch},
              {"val_f1", ckpt.val_f1},
              {"settings", ckpt.settings}};
  const auto ts = ckpt.params.tensors();
  for (int i = 0; i < kNumModelTensors; ++i) {
    f.tensors.emplace_back(std::string(kModelTensorNames[i]), *ts[i]);
  }
  write_tensor_file(path, f);
}

ModelCheckpoint load_model_checkpoint(const fs::path& path) {
  TensorFile f = read_tensor_file(path);
  ModelCheckpoint c;
  try {
    ModelShape shape;
    shape.num_queries = f.header.at("U").get<int>();
    shape.dim = f.header.at("d").get<int>();
    shape.d_prime = f.header.at("d_prime").get<int>();
    c.params = zero_params(shape);
    c.seed = f.header.at("seed").get<std::uint64_t>();
    c.epoch = f.header.at("epoch").get<int>();
    c.val_f1 = f.header.at("val_f1").get<double>();
    c.settings = f.header.value("settings", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, std::string("bad model checkpoint header: ") + e.what());
  }
  if (f.tensors.size() != kNumModelTensors) {
    throw ParseError(path.string(), 0, "model checkpoint must hold 7 tensors");
  }
  auto ts = c.params.tensors();
  for (int i = 0; i < kNumModelTensors; ++i) {
    if (f.tensors[i].first != kModelTensorNames[i]) {
      throw ParseError(path.string(), 0, "unexpected tensor " + f.tensors[i].first);
    }
    *ts[i] = std::move(f.tensors[i].second);
  }
  try {
    check_shapes(c.params);
  } catch (const ValidationError& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return c;
}

}  // namespace stepalign
