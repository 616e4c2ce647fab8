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

#include "stepalign/classifier/checkpoint.h"

#include "stepalign/error.h"
#include "stepalign/model/checkpoint.h"

namespace stepalign {

void save_classifier_checkpoint(const std::filesystem::path& path,
                                const ClassifierCheckpoint& ckpt) {
  TensorFile f;
  f.header = {{"kind", "classifier"},
              {"d", ckpt.params.dim},
              {"hidden", ckpt.params.hidden},
              {"seed", ckpt.seed},
              {"epoch", ckpt.epoch},
              {"val_score", ckpt.val_score},
              {"val_metric", ckpt.val_metric},
              {"settings", ckpt.settings}};
  const auto ts = ckpt.params.tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    f.tensors.emplace_back(std::string(kClassifierTensorNames[i]), *ts[i]);
  }
  write_tensor_file(path, f);
}

ClassifierCheckpoint load_classifier_checkpoint(const std::filesystem::path& path) {
  TensorFile f = read_tensor_file(path);
  ClassifierCheckpoint c;
  try {
    if (f.header.value("kind", "") != "classifier") {
      throw ParseError(path.string(), 0, "not a classifier checkpoint");
    }
    c.params = zero_classifier(f.header.at("d").get<int>(), f.header.at("hidden").get<int>());
    c.seed = f.header.at("seed").get<std::uint64_t>();
    c.epoch = f.header.at("epoch").get<int>();
    c.val_score = f.header.at("val_score").get<double>();
    c.val_metric = f.header.at("val_metric").get<std::string>();
    c.settings = f.header.value("settings", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, std::string("bad classifier header: ") + e.what());
  }
  auto ts = c.params.tensors();
  if (f.tensors.size() != ts.size()) {
    throw ParseError(path.string(), 0, "classifier checkpoint must hold 4 tensors");
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Matrix& m = f.tensors[i].second;
    if (f.tensors[i].first != kClassifierTensorNames[i] || m.rows() != ts[i]->rows() ||
        m.cols() != ts[i]->cols()) {
      throw ParseError(path.string(), 0, "unexpected tensor " + f.tensors[i].first);
    }
    *ts[i] = m;
  }
  return c;
}

}  // namespace stepalign
