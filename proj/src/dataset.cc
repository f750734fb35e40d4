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

#include "vtad/dataset.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "vtad/error.h"
#include "vtad/random.h"
#include "vtad/text.h"

namespace vtad {
namespace {

// RNG stream tags; keep stable, they determine every sampled manifest.
constexpr std::uint64_t kStreamHoldout = 1;
constexpr std::uint64_t kStreamPools = 2;
constexpr std::uint64_t kStreamTrainSample = 3;
constexpr std::uint64_t kStreamEvalSample = 4;
constexpr int kMaxSplitAttempts = 64;

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

std::vector<int> record_dims(const AnnotationRecord& r, const DescriptorCatalog& catalog) {
  std::vector<int> dims;
  for (const auto& name : r.descriptors) dims.push_back(descriptor_index(catalog, r.gender, name));
  return dims;
}

std::vector<int> eval_dims_of(const AnnotationRecord& r, const std::vector<int>& eval_dims,
                              const DescriptorCatalog& catalog) {
  std::vector<int> out;
  for (int d : record_dims(r, catalog)) {
    if (std::binary_search(eval_dims.begin(), eval_dims.end(), d)) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  return out;
}

using SpeakerPair = std::pair<std::string, std::string>;

SpeakerPair unordered_pair(const AnnotationRecord& r) {
  return r.weaker < r.stronger ? SpeakerPair{r.weaker, r.stronger}
                               : SpeakerPair{r.stronger, r.weaker};
}

std::set<std::string> speakers_of(const std::vector<AnnotationRecord>& records) {
  std::set<std::string> out;
  for (const auto& r : records) {
    out.insert(r.weaker);
    out.insert(r.stronger);
  }
  return out;
}

// Draws k utterances without replacement, in draw order.
std::vector<std::string> sample_utterances(const std::vector<std::string>& pool, int k,
                                           std::uint64_t seed, const std::string& speaker,
                                           const char* side) {
  if (static_cast<int>(pool.size()) < k) {
    throw Error(ErrorCode::kInsufficientUtterances,
                "speaker " + speaker + " has " + std::to_string(pool.size()) + " " + side +
                    " utterances, need " + std::to_string(k));
  }
  std::vector<std::string> items = pool;
  Rng rng(seed);
  for (int i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, items.size() - i);
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  return items;
}

void check_record_genders(const std::vector<AnnotationRecord>& records,
                          const EmbeddingSet& embeddings) {
  for (const auto& r : records) {
    for (const auto* spk : {&r.weaker, &r.stronger}) {
      if (embeddings.gender_of(*spk) != r.gender) {
        throw Error(ErrorCode::kInconsistentGender,
                    "speaker " + *spk + " is " +
                        std::string(gender_name(embeddings.gender_of(*spk))) +
                        " in the embedding set but the annotation says " +
                        std::string(gender_name(r.gender)));
      }
    }
  }
}

std::map<std::string, UtterancePools> resolve_pools(const SplitPlan& plan,
                                                    const EmbeddingSet& embeddings) {
  if (!plan.pools.empty()) return plan.pools;
  SplitPlan copy = plan;
  assign_utterances(copy, embeddings);
  return copy.pools;
}

const UtterancePools& pools_for(const std::map<std::string, UtterancePools>& pools,
                                const std::string& speaker) {
  auto it = pools.find(speaker);
  if (it == pools.end())
    throw Error(ErrorCode::kMissingEmbedding, "no utterance pool for speaker " + speaker);
  return it->second;
}

std::uint64_t record_tag(const std::vector<std::size_t>& indices, std::size_t i) {
  return i < indices.size() ? indices[i] : i;
}

void require_embeddings(const EmbeddingSet& embeddings, const std::string& speaker,
                        const std::vector<std::string>& utts) {
  for (const auto& u : utts) get_embedding(embeddings, speaker, u);
}

}  // namespace

int LabelVector::labeled_count() const {
  return static_cast<int>(
      std::count_if(values.begin(), values.end(), [](int v) { return v != -1; }));
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kUnseen: return "unseen";
    case Scenario::kSeenSpeaker: return "seen-speaker";
    case Scenario::kSeenSpeakerPair: return "seen-speaker-pair";
  }
  return "unseen";
}

std::optional<Scenario> parse_scenario(std::string_view s) {
  const std::string key = text::to_lower(text::trim(s));
  if (key == "unseen") return Scenario::kUnseen;
  if (key == "seen-speaker" || key == "seen_speaker") return Scenario::kSeenSpeaker;
  if (key == "seen-speaker-pair" || key == "seen_speaker_pair") return Scenario::kSeenSpeakerPair;
  return std::nullopt;
}

int default_k_eval(Scenario s) { return s == Scenario::kSeenSpeakerPair ? 10 : 20; }

void validate_record(const AnnotationRecord& r, const DescriptorCatalog& catalog) {
  if (r.weaker.empty() || r.stronger.empty())
    throw Error(ErrorCode::kFormatError, "empty speaker id");
  if (r.weaker == r.stronger)
    throw Error(ErrorCode::kSelfPair, "speaker " + r.weaker + " compared with itself");
  if (r.descriptors.empty()) throw Error(ErrorCode::kFormatError, "record has no descriptors");
  if (r.descriptors.size() > kMaxDescriptorsPerRecord) {
    throw Error(ErrorCode::kTooManyDescriptors,
                std::to_string(r.descriptors.size()) + " descriptors, at most " +
                    std::to_string(kMaxDescriptorsPerRecord) + " allowed");
  }
  std::set<int> seen;
  for (const auto& name : r.descriptors) {
    if (!seen.insert(descriptor_index(catalog, r.gender, name)).second)
      throw Error(ErrorCode::kFormatError, "descriptor '" + name + "' listed twice");
  }
}

std::vector<AnnotationRecord> parse_annotations_text(const std::string& contents,
                                                     const DescriptorCatalog& catalog,
                                                     const std::string& source) {
  std::vector<AnnotationRecord> records;
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 4) {
      throw Error(ErrorCode::kFormatError,
                  where(source, lineno) + "expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    AnnotationRecord r;
    r.weaker = std::string(text::trim(fields[0]));
    r.stronger = std::string(text::trim(fields[1]));
    r.line = lineno;
    auto gender = parse_gender_code(fields[2]);
    if (!gender)
      throw Error(ErrorCode::kFormatError, where(source, lineno) + "gender must be M or F");
    r.gender = *gender;
    try {
      for (std::string_view tok : text::split(fields[3], ',')) {
        tok = text::trim(tok);
        if (tok.empty()) throw Error(ErrorCode::kFormatError, "empty descriptor name");
        // Canonical capitalization comes from the catalog.
        r.descriptors.push_back(catalog.at(descriptor_index(catalog, r.gender, tok)).name);
      }
      validate_record(r, catalog);
    } catch (const Error& err) {
      throw Error(err.code(), where(source, lineno) + err.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<AnnotationRecord> parse_annotations(const std::string& path,
                                                const DescriptorCatalog& catalog) {
  return parse_annotations_text(text::read_file(path), catalog, path);
}

std::string serialize_annotations(const std::vector<AnnotationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.weaker + '\t' + r.stronger + '\t' + gender_code(r.gender) + '\t' +
           text::join(r.descriptors, ",") + '\n';
  }
  return out;
}

std::uint64_t annotations_fingerprint(const std::vector<AnnotationRecord>& records) {
  return fnv1a64(serialize_annotations(records));
}

LabelVector make_label_vector(const AnnotationRecord& record, Direction direction,
                              const DescriptorCatalog& catalog) {
  LabelVector label;
  label.values.assign(catalog.n_dims(), -1);
  const int value = direction == Direction::kForward ? 1 : 0;
  for (int d : record_dims(record, catalog)) label.values[d] = value;
  return label;
}

void validate_training_sample(const TrainingSample& sample, const DescriptorCatalog& catalog,
                              Gender gender) {
  if (static_cast<int>(sample.label.values.size()) != catalog.n_dims()) {
    throw Error(ErrorCode::kInvalidLabel, "label vector has " +
                                              std::to_string(sample.label.values.size()) +
                                              " entries, expected " +
                                              std::to_string(catalog.n_dims()));
  }
  if (sample.utt_a.speaker == sample.utt_b.speaker)
    throw Error(ErrorCode::kSelfPair, "training sample pairs speaker " + sample.utt_a.speaker +
                                          " with itself");
  int labeled = 0;
  for (int d = 0; d < catalog.n_dims(); ++d) {
    const int v = sample.label.values[d];
    if (v == -1) continue;
    if (v != 0 && v != 1)
      throw Error(ErrorCode::kInvalidLabel, "label value " + std::to_string(v) + " at dim " +
                                                std::to_string(d));
    if (catalog.gender_of(d) != gender)
      throw Error(ErrorCode::kInvalidLabel,
                  "labeled dim " + std::to_string(d) + " outside the " +
                      std::string(gender_name(gender)) + " block");
    ++labeled;
  }
  if (labeled == 0)
    throw Error(ErrorCode::kInvalidLabel, "training sample " + sample.utt_a.utterance + " / " +
                                              sample.utt_b.utterance + " has no labeled dimension");
}

SplitPlan split_scenario(const std::vector<AnnotationRecord>& records, Scenario scenario,
                         const std::map<Gender, std::vector<std::string>>& eval_descriptors,
                         std::uint64_t rng_seed, const DescriptorCatalog& catalog,
                         const SplitOptions& options) {
  if (records.empty()) throw Error(ErrorCode::kInfeasibleSplit, "no annotation records");
  if (options.k_train < 1 || options.k_eval < 1)
    throw Error(ErrorCode::kInvalidConfig, "utterances per speaker must be >= 1");
  for (const auto& r : records) validate_record(r, catalog);

  SplitPlan plan;
  plan.scenario = scenario;
  plan.rng_seed = rng_seed;
  plan.k_train = options.k_train;
  plan.k_eval = options.k_eval;

  std::set<Gender> genders_present;
  for (const auto& r : records) genders_present.insert(r.gender);

  if (scenario == Scenario::kSeenSpeakerPair) {
    std::set<int> dims;
    for (std::size_t i = 0; i < records.size(); ++i) {
      plan.train_indices.push_back(i);
      plan.eval_indices.push_back(i);
      for (int d : record_dims(records[i], catalog)) dims.insert(d);
    }
    plan.train_records = records;
    plan.eval_records = records;
    plan.eval_dims.assign(dims.begin(), dims.end());
    return plan;
  }

  if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0))
    throw Error(ErrorCode::kInvalidConfig, "holdout fraction must lie in (0, 1)");

  std::set<int> dims;
  for (const auto& [gender, names] : eval_descriptors) {
    for (const auto& name : names) dims.insert(descriptor_index(catalog, gender, name));
  }
  if (dims.empty()) throw Error(ErrorCode::kInfeasibleSplit, "no evaluation descriptors given");
  plan.eval_dims.assign(dims.begin(), dims.end());

  auto uncovered = [&](const std::vector<std::size_t>& eval_idx) -> std::optional<int> {
    std::set<int> covered;
    for (std::size_t i : eval_idx)
      for (int d : eval_dims_of(records[i], plan.eval_dims, catalog)) covered.insert(d);
    for (int d : plan.eval_dims)
      if (!covered.count(d)) return d;
    return std::nullopt;
  };

  std::optional<int> missing;
  for (int attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    std::vector<std::size_t> train_idx, eval_idx;

    if (scenario == Scenario::kUnseen) {
      std::set<std::string> held_out;
      for (Gender g : genders_present) {
        std::set<std::string> spk;
        for (const auto& r : records) {
          if (r.gender != g) continue;
          spk.insert(r.weaker);
          spk.insert(r.stronger);
        }
        std::vector<std::string> order(spk.begin(), spk.end());
        Rng rng(derive_seed(rng_seed, {kStreamHoldout, static_cast<std::uint64_t>(g),
                                       static_cast<std::uint64_t>(attempt)}));
        shuffle(std::span<std::string>(order), rng);
        // Both sides need at least one pair, so at least two speakers each.
        if (order.size() < 4) continue;
        const long n_hold = std::clamp<long>(
            std::lround(options.holdout_fraction * static_cast<double>(order.size())), 2,
            static_cast<long>(order.size()) - 2);
        held_out.insert(order.begin(), order.begin() + n_hold);
      }
      for (std::size_t i = 0; i < records.size(); ++i) {
        const bool a = held_out.count(records[i].weaker) != 0;
        const bool b = held_out.count(records[i].stronger) != 0;
        if (a && b) {
          if (!eval_dims_of(records[i], plan.eval_dims, catalog).empty()) eval_idx.push_back(i);
        } else if (!a && !b) {
          train_idx.push_back(i);
        }
      }
    } else {  // kSeenSpeaker
      std::map<SpeakerPair, std::vector<std::size_t>> by_pair;
      for (std::size_t i = 0; i < records.size(); ++i)
        by_pair[unordered_pair(records[i])].push_back(i);
      std::map<std::string, int> pair_count;
      std::vector<SpeakerPair> candidates;
      for (const auto& [pair, idx] : by_pair) {
        ++pair_count[pair.first];
        ++pair_count[pair.second];
        const bool has_eval = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) {
          return !eval_dims_of(records[i], plan.eval_dims, catalog).empty();
        });
        if (has_eval) candidates.push_back(pair);
      }
      Rng rng(derive_seed(rng_seed, {kStreamHoldout, 7, static_cast<std::uint64_t>(attempt)}));
      shuffle(std::span<SpeakerPair>(candidates), rng);
      const std::size_t target = std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::lround(options.holdout_fraction * static_cast<double>(candidates.size()))));

      std::set<SpeakerPair> moved;
      // A pair may move only if both speakers keep another pair on the train side.
      auto try_move = [&](const SpeakerPair& p) {
        if (moved.count(p) || pair_count[p.first] < 2 || pair_count[p.second] < 2) return false;
        --pair_count[p.first];
        --pair_count[p.second];
        moved.insert(p);
        return true;
      };
      auto pair_has_dim = [&](const SpeakerPair& p, int d) {
        for (std::size_t i : by_pair[p]) {
          auto e = eval_dims_of(records[i], plan.eval_dims, catalog);
          if (std::binary_search(e.begin(), e.end(), d)) return true;
        }
        return false;
      };
      for (int d : plan.eval_dims) {
        bool covered = false;
        for (const auto& p : moved) covered = covered || pair_has_dim(p, d);
        for (std::size_t c = 0; !covered && c < candidates.size(); ++c) {
          if (pair_has_dim(candidates[c], d)) covered = try_move(candidates[c]);
        }
      }
      for (std::size_t c = 0; c < candidates.size() && moved.size() < target; ++c)
        try_move(candidates[c]);

      for (std::size_t i = 0; i < records.size(); ++i) {
        if (!moved.count(unordered_pair(records[i]))) {
          train_idx.push_back(i);
        } else if (!eval_dims_of(records[i], plan.eval_dims, catalog).empty()) {
          eval_idx.push_back(i);
        }
      }
    }

    missing = uncovered(eval_idx);
    if (!missing && !train_idx.empty()) {
      plan.train_indices = std::move(train_idx);
      plan.eval_indices = std::move(eval_idx);
      for (std::size_t i : plan.train_indices) plan.train_records.push_back(records[i]);
      for (std::size_t i : plan.eval_indices) plan.eval_records.push_back(records[i]);
      return plan;
    }
  }
  if (missing) {
    const auto& d = catalog.at(*missing);
    throw Error(ErrorCode::kInfeasibleSplit,
                "no " + std::string(scenario_name(scenario)) + " evaluation pairs for descriptor " +
                    std::string(gender_name(d.gender)) + "/" + d.name + " after " +
                    std::to_string(kMaxSplitAttempts) + " attempts");
  }
  throw Error(ErrorCode::kInfeasibleSplit, "split leaves no training records");
}

std::optional<std::string> check_plan(const SplitPlan& plan) {
  if (plan.eval_records.empty()) return "plan has no evaluation records";
  const auto train_spk = speakers_of(plan.train_records);
  const auto eval_spk = speakers_of(plan.eval_records);
  switch (plan.scenario) {
    case Scenario::kUnseen:
      for (const auto& s : eval_spk)
        if (train_spk.count(s)) return "unseen: speaker " + s + " appears on both sides";
      break;
    case Scenario::kSeenSpeaker: {
      for (const auto& s : eval_spk)
        if (!train_spk.count(s)) return "seen-speaker: eval speaker " + s + " not in training";
      std::set<SpeakerPair> train_pairs;
      for (const auto& r : plan.train_records) train_pairs.insert(unordered_pair(r));
      for (const auto& r : plan.eval_records) {
        if (train_pairs.count(unordered_pair(r)))
          return "seen-speaker: pair " + r.weaker + "/" + r.stronger + " on both sides";
      }
      break;
    }
    case Scenario::kSeenSpeakerPair: {
      std::set<SpeakerPair> train_pairs;
      for (const auto& r : plan.train_records) train_pairs.insert({r.weaker, r.stronger});
      for (const auto& r : plan.eval_records) {
        if (!train_pairs.count({r.weaker, r.stronger}))
          return "seen-speaker-pair: eval pair " + r.weaker + "->" + r.stronger +
                 " not in training";
      }
      break;
    }
  }
  for (const auto& [spk, pools] : plan.pools) {
    std::set<std::string> train(pools.train.begin(), pools.train.end());
    for (const auto& u : pools.eval)
      if (train.count(u)) return "utterance " + spk + "/" + u + " in both pools";
  }
  return std::nullopt;
}

void assign_utterances(SplitPlan& plan, const EmbeddingSet& embeddings) {
  const auto train_spk = speakers_of(plan.train_records);
  const auto eval_spk = speakers_of(plan.eval_records);
  std::set<std::string> all = train_spk;
  all.insert(eval_spk.begin(), eval_spk.end());

  plan.pools.clear();
  for (const auto& spk : all) {
    std::vector<std::string> utts = embeddings.utterances_of(spk);
    if (utts.empty()) throw Error(ErrorCode::kMissingEmbedding, "no embeddings for speaker " + spk);
    const bool in_train = train_spk.count(spk) != 0;
    const bool in_eval = eval_spk.count(spk) != 0;
    UtterancePools pools;
    if (in_train && in_eval) {
      const int need = plan.k_train + plan.k_eval;
      if (static_cast<int>(utts.size()) < need) {
        throw Error(ErrorCode::kInsufficientUtterances,
                    "speaker " + spk + " has " + std::to_string(utts.size()) +
                        " utterances, need " + std::to_string(need) +
                        " for disjoint train/eval pools");
      }
      Rng rng(derive_seed(plan.rng_seed, {kStreamPools, fnv1a64(spk)}));
      shuffle(std::span<std::string>(utts), rng);
      pools.eval.assign(utts.begin(), utts.begin() + plan.k_eval);
      pools.train.assign(utts.begin() + plan.k_eval, utts.end());
      std::sort(pools.eval.begin(), pools.eval.end());
      std::sort(pools.train.begin(), pools.train.end());
    } else if (in_train) {
      pools.train = std::move(utts);
    } else {
      pools.eval = std::move(utts);
    }
    plan.pools.emplace(spk, std::move(pools));
  }
}

std::vector<TrainingSample> build_training_samples(const SplitPlan& plan,
                                                   const EmbeddingSet& embeddings,
                                                   const DescriptorCatalog& catalog) {
  check_record_genders(plan.train_records, embeddings);
  const auto pools = resolve_pools(plan, embeddings);
  const int k = plan.k_train;
  std::vector<TrainingSample> samples;
  samples.reserve(plan.train_records.size() * 2 * k * k);
  for (std::size_t i = 0; i < plan.train_records.size(); ++i) {
    const auto& r = plan.train_records[i];
    const std::uint64_t tag = record_tag(plan.train_indices, i);
    const auto a = sample_utterances(pools_for(pools, r.weaker).train, k,
                                     derive_seed(plan.rng_seed, {kStreamTrainSample, tag, 0}),
                                     r.weaker, "training");
    const auto b = sample_utterances(pools_for(pools, r.stronger).train, k,
                                     derive_seed(plan.rng_seed, {kStreamTrainSample, tag, 1}),
                                     r.stronger, "training");
    require_embeddings(embeddings, r.weaker, a);
    require_embeddings(embeddings, r.stronger, b);
    const LabelVector fwd = make_label_vector(r, Direction::kForward, catalog);
    const LabelVector rev = make_label_vector(r, Direction::kReversed, catalog);
    for (const auto& ua : a)
      for (const auto& ub : b) samples.push_back({{r.weaker, ua}, {r.stronger, ub}, fwd});
    for (const auto& ua : a)
      for (const auto& ub : b) samples.push_back({{r.stronger, ub}, {r.weaker, ua}, rev});
  }
  return samples;
}

std::vector<Trial> build_trials(const SplitPlan& plan, const EmbeddingSet& embeddings,
                                const DescriptorCatalog& catalog) {
  check_record_genders(plan.eval_records, embeddings);
  const auto pools = resolve_pools(plan, embeddings);
  const int k = plan.k_eval;
  std::vector<Trial> trials;
  trials.reserve(expected_trial_count(plan, catalog));
  for (std::size_t i = 0; i < plan.eval_records.size(); ++i) {
    const auto& r = plan.eval_records[i];
    const auto dims = eval_dims_of(r, plan.eval_dims, catalog);
    if (dims.empty()) continue;
    const std::uint64_t tag = record_tag(plan.eval_indices, i);
    const auto a = sample_utterances(pools_for(pools, r.weaker).eval, k,
                                     derive_seed(plan.rng_seed, {kStreamEvalSample, tag, 0}),
                                     r.weaker, "evaluation");
    const auto b = sample_utterances(pools_for(pools, r.stronger).eval, k,
                                     derive_seed(plan.rng_seed, {kStreamEvalSample, tag, 1}),
                                     r.stronger, "evaluation");
    require_embeddings(embeddings, r.weaker, a);
    require_embeddings(embeddings, r.stronger, b);
    for (int d : dims) {
      for (const auto& ua : a)
        for (const auto& ub : b) trials.push_back({{r.weaker, ua}, {r.stronger, ub}, d, 1});
      for (const auto& ua : a)
        for (const auto& ub : b) trials.push_back({{r.stronger, ub}, {r.weaker, ua}, d, 0});
    }
  }
  return trials;
}

std::size_t expected_trial_count(const SplitPlan& plan, const DescriptorCatalog& catalog) {
  std::size_t n = 0;
  for (const auto& r : plan.eval_records) n += eval_dims_of(r, plan.eval_dims, catalog).size();
  return 2 * n * static_cast<std::size_t>(plan.k_eval) * static_cast<std::size_t>(plan.k_eval);
}

}  // namespace vtad
