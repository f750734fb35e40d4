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

#include <sstream>

#include "vtad/dataset.h"
#include "vtad/error.h"
#include "vtad/text.h"

namespace vtad {
namespace {

constexpr std::string_view kManifestMagic = "#vtad-manifest v1";

std::string index_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<long long> parse_list(std::string_view s, const std::string& ctx) {
  std::vector<long long> out;
  if (text::trim(s).empty()) return out;
  for (auto tok : text::split(s, ',')) {
    auto v = text::parse_int(tok);
    if (!v || *v < 0)
      throw Error(ErrorCode::kFormatError, ctx + "bad index '" + std::string(tok) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

std::string serialize_manifest(const SplitPlan& plan,
                               const std::vector<AnnotationRecord>& all_records) {
  std::ostringstream out;
  out << kManifestMagic << '\n';
  out << "scenario\t" << scenario_name(plan.scenario) << '\n';
  out << "seed\t" << plan.rng_seed << '\n';
  out << "k_train\t" << plan.k_train << '\n';
  out << "k_eval\t" << plan.k_eval << '\n';
  out << "annotations\t" << all_records.size() << '\t'
      << text::hex64(annotations_fingerprint(all_records)) << '\n';
  std::string dims;
  for (std::size_t i = 0; i < plan.eval_dims.size(); ++i) {
    if (i) dims += ',';
    dims += std::to_string(plan.eval_dims[i]);
  }
  out << "eval_dims\t" << dims << '\n';
  out << "train\t" << index_list(plan.train_indices) << '\n';
  out << "eval\t" << index_list(plan.eval_indices) << '\n';
  for (const auto& [spk, pools] : plan.pools) {
    out << "pool\t" << spk << "\ttrain\t" << text::join(pools.train, ",") << '\n';
    out << "pool\t" << spk << "\teval\t" << text::join(pools.eval, ",") << '\n';
  }
  return out.str();
}

SplitPlan parse_manifest(const std::string& contents,
                         const std::vector<AnnotationRecord>& all_records,
                         const std::string& source) {
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;
  auto ctx = [&] { return source + ":" + std::to_string(lineno) + ": "; };

  if (!std::getline(in, line) || text::trim(line) != kManifestMagic)
    throw Error(ErrorCode::kFormatError, source + ": missing '#vtad-manifest v1' header");
  ++lineno;

  SplitPlan plan;
  bool have_annotations = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto f = text::split(line, '\t');
    const std::string_view key = f[0];
    auto need = [&](std::size_t n) {
      if (f.size() != n)
        throw Error(ErrorCode::kFormatError, ctx() + "expected " + std::to_string(n) +
                                                 " fields for '" + std::string(key) + "'");
    };
    if (key == "scenario") {
      need(2);
      auto s = parse_scenario(f[1]);
      if (!s) throw Error(ErrorCode::kFormatError, ctx() + "unknown scenario");
      plan.scenario = *s;
    } else if (key == "seed") {
      need(2);
      auto v = text::parse_int(f[1]);
      if (!v) throw Error(ErrorCode::kFormatError, ctx() + "bad seed");
      plan.rng_seed = static_cast<std::uint64_t>(*v);
    } else if (key == "k_train" || key == "k_eval") {
      need(2);
      auto v = text::parse_int(f[1]);
      if (!v || *v < 1) throw Error(ErrorCode::kFormatError, ctx() + "bad " + std::string(key));
      (key == "k_train" ? plan.k_train : plan.k_eval) = static_cast<int>(*v);
    } else if (key == "annotations") {
      need(3);
      auto n = text::parse_int(f[1]);
      if (!n || static_cast<std::size_t>(*n) != all_records.size() ||
          f[2] != text::hex64(annotations_fingerprint(all_records))) {
        throw Error(ErrorCode::kFormatError,
                    ctx() + "manifest was generated from a different annotation file");
      }
      have_annotations = true;
    } else if (key == "eval_dims") {
      need(2);
      for (long long d : parse_list(f[1], ctx())) plan.eval_dims.push_back(static_cast<int>(d));
    } else if (key == "train" || key == "eval") {
      need(2);
      auto& idx = key == "train" ? plan.train_indices : plan.eval_indices;
      auto& recs = key == "train" ? plan.train_records : plan.eval_records;
      for (long long i : parse_list(f[1], ctx())) {
        if (static_cast<std::size_t>(i) >= all_records.size())
          throw Error(ErrorCode::kFormatError, ctx() + "record index out of range");
        idx.push_back(static_cast<std::size_t>(i));
        recs.push_back(all_records[static_cast<std::size_t>(i)]);
      }
    } else if (key == "pool") {
      need(4);
      auto& pools = plan.pools[std::string(f[1])];
      std::vector<std::string> utts;
      if (!text::trim(f[3]).empty())
        for (auto u : text::split(f[3], ',')) utts.emplace_back(u);
      if (f[2] == "train") {
        pools.train = std::move(utts);
      } else if (f[2] == "eval") {
        pools.eval = std::move(utts);
      } else {
        throw Error(ErrorCode::kFormatError, ctx() + "pool side must be train or eval");
      }
    } else {
      throw Error(ErrorCode::kFormatError, ctx() + "unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_annotations)
    throw Error(ErrorCode::kFormatError, source + ": missing annotations line");
  if (auto problem = check_plan(plan))
    throw Error(ErrorCode::kFormatError, source + ": " + *problem);
  return plan;
}

void save_manifest(const SplitPlan& plan, const std::vector<AnnotationRecord>& all_records,
                   const std::string& path) {
  text::write_file_atomic(path, serialize_manifest(plan, all_records));
}

SplitPlan load_manifest(const std::string& path,
                        const std::vector<AnnotationRecord>& all_records) {
  return parse_manifest(text::read_file(path), all_records, path);
}

}  // namespace vtad
