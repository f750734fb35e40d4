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

#include "vtad/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <json.hpp>

#include "vtad/error.h"

namespace vtad {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

EerResult compute_eer(std::span<const ScoredOutcome> scores) {
  std::vector<ScoredOutcome> sorted(scores.begin(), scores.end());
  long long n_target = 0;
  for (const auto& s : sorted) {
    if (!std::isfinite(s.score)) throw Error(ErrorCode::kNonFiniteValue, "non-finite score");
    if (s.truth != 0 && s.truth != 1) throw Error(ErrorCode::kFormatError, "truth must be 0 or 1");
    n_target += s.truth;
  }
  const long long n_nontarget = static_cast<long long>(sorted.size()) - n_target;
  if (n_target == 0 || n_nontarget == 0)
    throw Error(ErrorCode::kOneClassOnly, "EER needs both target and nontarget scores");
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score < b.score; });

  // Sweep points: -inf, each distinct score, +inf. At point i, `below_t` is
  // the number of targets strictly below the threshold, `above_n` the number
  // of nontargets at or above it.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> thr{-kInf};
  std::vector<long long> below_t{0}, above_n{n_nontarget};
  long long t_seen = 0, n_seen = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double s = sorted[i].score;
    thr.push_back(s);
    below_t.push_back(t_seen);
    above_n.push_back(n_nontarget - n_seen);
    for (; i < sorted.size() && sorted[i].score == s; ++i) {
      (sorted[i].truth ? t_seen : n_seen) += 1;
    }
  }
  thr.push_back(kInf);
  below_t.push_back(n_target);
  above_n.push_back(0);

  const double nt = static_cast<double>(n_target);
  const double nn = static_cast<double>(n_nontarget);
  // Exact sign of FNR - FPR via cross-multiplication.
  auto sign = [&](std::size_t i) {
    const long long lhs = below_t[i] * n_nontarget;
    const long long rhs = above_n[i] * n_target;
    return (lhs > rhs) - (lhs < rhs);
  };
  auto fnr = [&](std::size_t i) { return static_cast<double>(below_t[i]) / nt; };
  auto fpr = [&](std::size_t i) { return static_cast<double>(above_n[i]) / nn; };

  std::size_t i = 0;
  while (sign(i) < 0) ++i;  // terminates: the +inf point has sign +1

  EerResult res;
  if (sign(i) == 0) {
    std::size_t j = i;
    while (j + 1 < thr.size() && sign(j + 1) == 0) ++j;
    res.eer = fnr(i);
    res.threshold = 0.5 * (thr[i] + thr[j]);
    return res;
  }
  const std::size_t k = i - 1;
  const double d_lo = fnr(k) - fpr(k);
  const double d_hi = fnr(i) - fpr(i);
  const double alpha = -d_lo / (d_hi - d_lo);
  res.eer = fnr(k) + alpha * (fnr(i) - fnr(k));
  if (std::isfinite(thr[k]) && std::isfinite(thr[i])) {
    res.threshold = thr[k] + alpha * (thr[i] - thr[k]);
  } else {
    res.threshold = std::isfinite(thr[k]) ? thr[k] : thr[i];
  }
  return res;
}

double compute_accuracy(std::span<const ScoredOutcome> scores, double threshold) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "accuracy of an empty trial list");
  std::size_t correct = 0;
  for (const auto& s : scores) {
    const int decision = s.score > threshold ? 1 : 0;
    if (decision == s.truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

Report per_descriptor_report(std::span<const ScoredTrial> scored,
                             const DescriptorCatalog& catalog, bool weighted) {
  if (scored.empty()) throw Error(ErrorCode::kEmptyInput, "no scored trials");
  std::map<int, std::vector<ScoredOutcome>> groups;
  for (const auto& s : scored) {
    if (s.trial.descriptor_dim < 0 || s.trial.descriptor_dim >= catalog.n_dims())
      throw Error(ErrorCode::kDimensionMismatch, "trial descriptor index out of range");
    groups[s.trial.descriptor_dim].push_back({s.score, s.trial.truth});
  }

  Report report;
  report.weighted = weighted;
  for (const auto& [dim, outcomes] : groups) {
    const auto& d = catalog.at(dim);
    DescriptorReport row;
    row.descriptor_dim = dim;
    row.name = d.name;
    row.gender = d.gender;
    for (const auto& o : outcomes) (o.truth ? row.n_target : row.n_nontarget) += 1;
    if (row.n_target == 0 || row.n_nontarget == 0) {
      throw Error(ErrorCode::kOneClassOnly, "descriptor " + std::string(gender_name(d.gender)) +
                                                "/" + d.name + " has only one trial class");
    }
    const EerResult eer = compute_eer(outcomes);
    row.acc_percent = 100.0 * compute_accuracy(outcomes);
    row.eer_percent = 100.0 * eer.eer;
    row.eer_threshold = eer.threshold;
    report.rows.push_back(row);
  }

  for (Gender g : {Gender::kMale, Gender::kFemale}) {
    AverageRow avg;
    avg.gender = g;
    double weight_sum = 0.0;
    for (const auto& row : report.rows) {
      if (row.gender != g) continue;
      const double w = weighted ? static_cast<double>(row.n_target + row.n_nontarget) : 1.0;
      avg.acc_percent += w * row.acc_percent;
      avg.eer_percent += w * row.eer_percent;
      avg.n_target += row.n_target;
      avg.n_nontarget += row.n_nontarget;
      weight_sum += w;
      ++avg.descriptors;
    }
    if (avg.descriptors == 0) continue;
    avg.acc_percent /= weight_sum;
    avg.eer_percent /= weight_sum;
    report.averages.push_back(avg);
  }
  return report;
}

std::string format_report_tsv(const Report& report) {
  std::string out =
      "gender\tdescriptor\tn_target\tn_nontarget\tacc_percent\teer_percent\tthreshold\n";
  for (const auto& avg : report.averages) {
    for (const auto& row : report.rows) {
      if (row.gender != avg.gender) continue;
      out += std::string(gender_name(row.gender)) + '\t' + row.name + '\t' +
             std::to_string(row.n_target) + '\t' + std::to_string(row.n_nontarget) + '\t' +
             fixed(row.acc_percent, 2) + '\t' + fixed(row.eer_percent, 2) + '\t' +
             fixed(row.eer_threshold, 6) + '\n';
    }
    out += std::string(gender_name(avg.gender)) + "\tAvg\t" + std::to_string(avg.n_target) + '\t' +
           std::to_string(avg.n_nontarget) + '\t' + fixed(avg.acc_percent, 2) + '\t' +
           fixed(avg.eer_percent, 2) + "\t-\n";
  }
  return out;
}

std::string format_report_json(const Report& report) {
  nlohmann::ordered_json j;
  j["weighted_average"] = report.weighted;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"gender", gender_name(row.gender)},
                         {"descriptor", row.name},
                         {"descriptor_dim", row.descriptor_dim},
                         {"n_target", row.n_target},
                         {"n_nontarget", row.n_nontarget},
                         {"acc_percent", row.acc_percent},
                         {"eer_percent", row.eer_percent},
                         {"threshold", row.eer_threshold}});
  }
  j["averages"] = nlohmann::ordered_json::array();
  for (const auto& avg : report.averages) {
    j["averages"].push_back({{"gender", gender_name(avg.gender)},
                             {"descriptors", avg.descriptors},
                             {"n_target", avg.n_target},
                             {"n_nontarget", avg.n_nontarget},
                             {"acc_percent", avg.acc_percent},
                             {"eer_percent", avg.eer_percent}});
  }
  return j.dump(2) + "\n";
}

}  // namespace vtad
