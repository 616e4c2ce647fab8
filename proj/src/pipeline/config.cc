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

#include "stepalign/pipeline/config.h"

#include <initializer_list>
#include <string>

#include "stepalign/error.h"

namespace stepalign {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* what, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ValidationError(std::string(what) + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key \"") + key + "\": " + e.what());
  }
}

json to_json(const AdamConfig& a) {
  return {{"learning_rate", a.learning_rate},
          {"beta1", a.beta1},
          {"beta2", a.beta2},
          {"epsilon", a.epsilon}};
}

AdamConfig adam_from_json(const json& j, AdamConfig a) {
  check_keys(j, "adam", {"learning_rate", "beta1", "beta2", "epsilon"});
  read(j, "learning_rate", a.learning_rate);
  read(j, "beta1", a.beta1);
  read(j, "beta2", a.beta2);
  read(j, "epsilon", a.epsilon);
  return a;
}

}  // namespace

json to_json(const TrainConfig& c) {
  return {{"dim", c.shape.dim},
          {"d_prime", c.shape.d_prime},
          {"num_queries", c.shape.num_queries},
          {"gamma", c.loss.gamma},
          {"w_sup", c.loss.w_sup},
          {"w_global", c.loss.w_global},
          {"drop_pct", c.loss.drop_pct},
          {"normalize_input", c.loss.normalize_input},
          {"allow_step_drop", c.align.allow_step_drop},
          {"adam", to_json(c.adam)},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"query_scale", c.query_scale},
          {"eval_every", c.eval_every}};
}

// drop_pct and normalize_input are shared by training and alignment.
TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  check_keys(j, "alignment config",
             {"dim", "d_prime", "num_queries", "gamma", "w_sup", "w_global", "drop_pct",
              "normalize_input", "allow_step_drop", "adam", "batch_size", "epochs", "seed",
              "query_scale", "eval_every"});
  read(j, "dim", c.shape.dim);
  read(j, "d_prime", c.shape.d_prime);
  read(j, "num_queries", c.shape.num_queries);
  read(j, "gamma", c.loss.gamma);
  read(j, "w_sup", c.loss.w_sup);
  read(j, "w_global", c.loss.w_global);
  read(j, "drop_pct", c.loss.drop_pct);
  read(j, "normalize_input", c.loss.normalize_input);
  read(j, "allow_step_drop", c.align.allow_step_drop);
  c.align.drop_pct = c.loss.drop_pct;
  c.align.normalize_input = c.loss.normalize_input;
  if (j.contains("adam")) c.adam = adam_from_json(j.at("adam"), c.adam);
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "query_scale", c.query_scale);
  read(j, "eval_every", c.eval_every);
  validate(c);
  return c;
}

json to_json(const ClassifierConfig& c) {
  return {{"hidden", c.hidden},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"adam", to_json(c.adam)},
          {"beta", c.beta},
          {"seed", c.seed},
          {"eval_every", c.eval_every},
          {"video_only", c.video_only}};
}

ClassifierConfig classifier_config_from_json(const json& j, ClassifierConfig c) {
  check_keys(j, "classifier config",
             {"hidden", "epochs", "batch_size", "adam", "beta", "seed", "eval_every",
              "video_only"});
  read(j, "hidden", c.hidden);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  if (j.contains("adam")) c.adam = adam_from_json(j.at("adam"), c.adam);
  read(j, "beta", c.beta);
  read(j, "seed", c.seed);
  read(j, "eval_every", c.eval_every);
  read(j, "video_only", c.video_only);
  validate(c);
  return c;
}

}  // namespace stepalign
