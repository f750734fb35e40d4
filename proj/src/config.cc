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

#include "vtad/config.h"

#include <filesystem>
#include <sstream>

#include "vtad/error.h"
#include "vtad/text.h"

namespace vtad {
namespace {

std::vector<std::string> split_names(std::string_view value) {
  std::vector<std::string> out;
  if (text::trim(value).empty()) return out;
  for (auto tok : text::split(value, ',')) out.emplace_back(text::trim(tok));
  return out;
}

std::string resolve(const std::string& base_dir, std::string_view value) {
  std::filesystem::path p{std::string(text::trim(value))};
  if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
  return p.lexically_normal().string();
}

}  // namespace

SplitOptions RunConfig::split_options() const {
  return {holdout_fraction, k_train, resolved_k_eval()};
}

RunConfig default_run_config() {
  RunConfig c;
  c.eval_descriptors[Gender::kMale] = default_eval_descriptors(Gender::kMale);
  c.eval_descriptors[Gender::kFemale] = default_eval_descriptors(Gender::kFemale);
  return c;
}

RunConfig parse_run_config(const std::string& contents, const std::string& base_dir,
                           const std::string& source) {
  RunConfig c = default_run_config();
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    auto fail = [&](const std::string& msg) {
      return Error(ErrorCode::kInvalidConfig, source + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (eq == std::string_view::npos) throw fail("expected key = value");
    const std::string key = text::to_lower(text::trim(body.substr(0, eq)));
    const std::string_view value = text::trim(body.substr(eq + 1));
    auto as_int = [&]() {
      auto v = text::parse_int(value);
      if (!v) throw fail("'" + key + "' needs an integer");
      return *v;
    };
    auto as_double = [&]() {
      auto v = text::parse_double(value);
      if (!v) throw fail("'" + key + "' needs a number");
      return *v;
    };

    if (key == "embeddings") {
      c.embeddings_path = resolve(base_dir, value);
    } else if (key == "annotations") {
      c.annotations_path = resolve(base_dir, value);
    } else if (key == "out") {
      c.out_dir = resolve(base_dir, value);
    } else if (key == "scenario") {
      auto s = parse_scenario(value);
      if (!s) throw fail("scenario must be unseen, seen-speaker or seen-speaker-pair");
      c.scenario = *s;
    } else if (key == "eval_descriptors.male") {
      c.eval_descriptors[Gender::kMale] = split_names(value);
    } else if (key == "eval_descriptors.female") {
      c.eval_descriptors[Gender::kFemale] = split_names(value);
    } else if (key == "holdout_fraction") {
      c.holdout_fraction = as_double();
    } else if (key == "k_train") {
      c.k_train = static_cast<int>(as_int());
    } else if (key == "k_eval") {
      c.k_eval = static_cast<int>(as_int());
    } else if (key == "seed") {
      const auto v = as_int();
      if (v < 0) throw fail("seed must be >= 0");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "learning_rate") {
      c.train.learning_rate = as_double();
      c.learning_rate_set = true;
    } else if (key == "batch_size") {
      c.train.batch_size = static_cast<int>(as_int());
    } else if (key == "epochs") {
      c.train.epochs = static_cast<int>(as_int());
    } else if (key == "dropout_rate") {
      c.train.dropout_rate = as_double();
    } else if (key == "bn_momentum") {
      c.train.bn_momentum = as_double();
    } else if (key == "hidden_size") {
      c.train.hidden_size = static_cast<int>(as_int());
    } else if (key == "optimizer") {
      auto o = parse_optimizer(value);
      if (!o) throw fail("optimizer must be adam or sgd");
      c.train.optimizer = *o;
    } else if (key == "weighted_average") {
      const std::string v = text::to_lower(value);
      if (v != "true" && v != "false") throw fail("weighted_average must be true or false");
      c.weighted_average = v == "true";
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_run_config(text::read_file(path), dir, path);
}

void validate_run_config(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (c.embeddings_path.empty()) fail("'embeddings' is not set");
  if (c.annotations_path.empty()) fail("'annotations' is not set");
  if (!std::filesystem::is_regular_file(c.embeddings_path))
    fail("embeddings file not found: " + c.embeddings_path);
  if (!std::filesystem::is_regular_file(c.annotations_path))
    fail("annotations file not found: " + c.annotations_path);
  if (c.k_train < 1) fail("k_train must be >= 1");
  if (c.resolved_k_eval() < 1) fail("k_eval must be >= 1");
  if (c.scenario != Scenario::kSeenSpeakerPair &&
      !(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0))
    fail("holdout_fraction must lie in (0, 1)");
  TrainConfig t = c.train;
  t.validate();
}

std::string describe_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "scenario=" << scenario_name(c.scenario) << " seed=" << c.seed
      << " k_train=" << c.k_train << " k_eval=" << c.resolved_k_eval()
      << " holdout_fraction=" << text::format_double(c.holdout_fraction);
  return out.str();
}

}  // namespace vtad
