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

#ifndef VTAD_PIPELINE_H_
#define VTAD_PIPELINE_H_

// The split / train / eval / report stages behind the command-line tool.
// Each stage reads its inputs from files and writes its artifacts into the
// run's output directory, so every intermediate result can be inspected.

#include <iosfwd>
#include <string>
#include <vector>

#include "vtad/config.h"
#include "vtad/dataset.h"
#include "vtad/metrics.h"

namespace vtad {

inline constexpr const char* kManifestFile = "manifest.tsv";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kTrainLogFile = "train_log.tsv";
inline constexpr const char* kScoresFile = "scores.tsv";
inline constexpr const char* kReportFile = "report.tsv";
inline constexpr const char* kReportJsonFile = "report.json";

// Per-descriptor pair and speaker counts for one side of a split.
std::string format_split_stats(const SplitPlan& plan, const DescriptorCatalog& catalog);

// Writes <out>/manifest.tsv; returns its path.
std::string cmd_split(const RunConfig& config, std::ostream& log);
// Writes <out>/model.ckpt and <out>/train_log.tsv; returns the checkpoint path.
std::string cmd_train(const RunConfig& config, const std::string& manifest_path,
                      std::ostream& log);
// Writes <out>/scores.tsv, <out>/report.tsv and <out>/report.json.
Report cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
                const std::string& manifest_path, std::ostream& log);
// Rebuilds the report files from an existing scores file.
Report cmd_report(const std::string& scores_path, const std::string& out_dir, bool weighted,
                  std::ostream& log);

std::string format_scores(const std::vector<ScoredTrial>& scored);
std::vector<ScoredTrial> parse_scores(const std::string& contents,
                                      const std::string& source = "<memory>");

}  // namespace vtad

#endif  // VTAD_PIPELINE_H_
