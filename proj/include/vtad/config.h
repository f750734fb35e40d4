// Copyright (c) 2026 The vtad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VTAD_CONFIG_H_
#define VTAD_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtad/catalog.h"
#include "vtad/dataset.h"
#include "vtad/trainer.h"

namespace vtad {

// Flat `key = value` run configuration. Relative paths resolve against the
// directory of the config file.
struct RunConfig {
  std::string embeddings_path;
  std::string annotations_path;
  Scenario scenario = Scenario::kUnseen;
  std::map<Gender, std::vector<std::string>> eval_descriptors;
  double holdout_fraction = 0.2;
  int k_train = 20;
  std::optional<int> k_eval;  // defaults per scenario
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  TrainConfig train;
  bool learning_rate_set = false;  // otherwise picked from the encoder tag
  bool weighted_average = false;

  int resolved_k_eval() const { return k_eval.value_or(default_k_eval(scenario)); }
  SplitOptions split_options() const;
};

RunConfig default_run_config();
RunConfig parse_run_config(const std::string& contents, const std::string& base_dir,
                           const std::string& source = "<memory>");
RunConfig load_run_config(const std::string& path);

// Checks value ranges and that the input files exist. Throws kInvalidConfig.
void validate_run_config(const RunConfig& config);

std::string describe_run_config(const RunConfig& config);

}  // namespace vtad

#endif  // VTAD_CONFIG_H_
