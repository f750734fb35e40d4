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

#ifndef VTAD_METRICS_H_
#define VTAD_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtad/catalog.h"
#include "vtad/dataset.h"

namespace vtad {

struct ScoredOutcome {
  double score = 0.0;
  int truth = 0;  // 1 = target
};

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

struct EerResult {
  double eer = 0.0;  // in [0, 1]
  double threshold = 0.0;
};

// Accept-if-score>=t convention. Sweeps t over -inf, the sorted distinct
// scores, +inf. FNR(t) = share of targets below t, FPR(t) = share of
// nontargets at or above t. Where FNR == FPR at sweep points, the EER is
// that value and the threshold is the midpoint of the first and last such
// point; otherwise the two step functions are interpolated linearly between
// the adjacent sweep points where FNR - FPR changes sign.
EerResult compute_eer(std::span<const ScoredOutcome> scores);

// Share of trials where (score > threshold) equals the truth bit. A score
// equal to the threshold counts as a negative decision.
double compute_accuracy(std::span<const ScoredOutcome> scores, double threshold = 0.5);

struct DescriptorReport {
  int descriptor_dim = 0;
  std::string name;
  Gender gender = Gender::kMale;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  double acc_percent = 0.0;
  double eer_percent = 0.0;
  double eer_threshold = 0.0;
};

struct AverageRow {
  Gender gender = Gender::kMale;
  std::size_t descriptors = 0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  double acc_percent = 0.0;
  double eer_percent = 0.0;
};

struct Report {
  std::vector<DescriptorReport> rows;  // ascending descriptor_dim
  std::vector<AverageRow> averages;    // one per gender present, male first
  bool weighted = false;
};

// Groups by descriptor; the average rows are unweighted means over the
// descriptors of a gender unless `weighted` asks for trial-count weights.
Report per_descriptor_report(std::span<const ScoredTrial> scored,
                             const DescriptorCatalog& catalog, bool weighted = false);

// Tab-separated table with 2-decimal percentages.
std::string format_report_tsv(const Report& report);
std::string format_report_json(const Report& report);

}  // namespace vtad

#endif  // VTAD_METRICS_H_
