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

#ifndef VTAD_DATASET_H_
#define VTAD_DATASET_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtad/catalog.h"
#include "vtad/embedding_store.h"

namespace vtad {

// One annotated ordered speaker pair: `stronger` is stronger than `weaker`
// in every listed descriptor.
struct AnnotationRecord {
  std::string weaker;
  std::string stronger;
  std::vector<std::string> descriptors;  // canonical names, 1..3 entries
  Gender gender = Gender::kMale;
  std::size_t line = 0;  // source line, 0 when not from a file

  bool operator==(const AnnotationRecord& o) const {
    return weaker == o.weaker && stronger == o.stronger && descriptors == o.descriptors &&
           gender == o.gender;
  }
};

inline constexpr std::size_t kMaxDescriptorsPerRecord = 3;

// Per-dimension comparison label: 1 = B stronger, 0 = B not stronger,
// -1 = not compared (masked out of the loss).
struct LabelVector {
  std::vector<int> values;

  int labeled_count() const;
};

enum class Direction { kForward, kReversed };

struct TrainingSample {
  UtteranceKey utt_a;
  UtteranceKey utt_b;
  LabelVector label;
};

struct Trial {
  UtteranceKey utt_a;
  UtteranceKey utt_b;
  int descriptor_dim = 0;
  int truth = 0;  // 1: B is stronger than A in the descriptor
};

enum class Scenario { kUnseen, kSeenSpeaker, kSeenSpeakerPair };

std::string_view scenario_name(Scenario s);  // "unseen" / "seen-speaker" / ...
std::optional<Scenario> parse_scenario(std::string_view s);
int default_k_eval(Scenario s);

// Utterance pools per speaker; records draw their per-pair samples from these.
struct UtterancePools {
  std::vector<std::string> train;
  std::vector<std::string> eval;
};

struct SplitOptions {
  // Unseen: fraction of each gender's speakers held out for evaluation.
  // SeenSpeaker: fraction of speaker pairs moved to the evaluation side.
  double holdout_fraction = 0.2;
  int k_train = 20;
  int k_eval = 20;
};

struct SplitPlan {
  Scenario scenario = Scenario::kUnseen;
  std::uint64_t rng_seed = 0;
  int k_train = 20;
  int k_eval = 20;
  std::vector<std::size_t> train_indices;  // into the parsed annotation list
  std::vector<std::size_t> eval_indices;
  std::vector<AnnotationRecord> train_records;
  std::vector<AnnotationRecord> eval_records;
  std::vector<int> eval_dims;  // sorted catalog indices scored at evaluation
  std::map<std::string, UtterancePools> pools;  // empty until assigned
};

std::vector<AnnotationRecord> parse_annotations_text(const std::string& contents,
                                                     const DescriptorCatalog& catalog,
                                                     const std::string& source = "<memory>");
std::vector<AnnotationRecord> parse_annotations(const std::string& path,
                                                const DescriptorCatalog& catalog);
std::string serialize_annotations(const std::vector<AnnotationRecord>& records);

// Checks the record-level invariants; throws on violation.
void validate_record(const AnnotationRecord& record, const DescriptorCatalog& catalog);

LabelVector make_label_vector(const AnnotationRecord& record, Direction direction,
                              const DescriptorCatalog& catalog);

// Rejects samples with no labeled dimension, self pairs, and labels that fall
// outside the gender block given.
void validate_training_sample(const TrainingSample& sample, const DescriptorCatalog& catalog,
                              Gender gender);

SplitPlan split_scenario(const std::vector<AnnotationRecord>& records, Scenario scenario,
                         const std::map<Gender, std::vector<std::string>>& eval_descriptors,
                         std::uint64_t rng_seed, const DescriptorCatalog& catalog,
                         const SplitOptions& options = {});

// Fills plan.pools from the available utterances. Speakers used on both
// sides get disjoint train/eval pools.
void assign_utterances(SplitPlan& plan, const EmbeddingSet& embeddings);

// Checks the scenario disjointness conditions; returns a description of the
// first violation, or nullopt.
std::optional<std::string> check_plan(const SplitPlan& plan);

std::vector<TrainingSample> build_training_samples(const SplitPlan& plan,
                                                   const EmbeddingSet& embeddings,
                                                   const DescriptorCatalog& catalog);
std::vector<Trial> build_trials(const SplitPlan& plan, const EmbeddingSet& embeddings,
                                const DescriptorCatalog& catalog);

// Number of trials build_trials will emit for the plan.
std::size_t expected_trial_count(const SplitPlan& plan, const DescriptorCatalog& catalog);

// Manifest: text serialization of a SplitPlan (records by index).
std::string serialize_manifest(const SplitPlan& plan,
                               const std::vector<AnnotationRecord>& all_records);
SplitPlan parse_manifest(const std::string& contents,
                         const std::vector<AnnotationRecord>& all_records,
                         const std::string& source = "<memory>");
void save_manifest(const SplitPlan& plan, const std::vector<AnnotationRecord>& all_records,
                   const std::string& path);
SplitPlan load_manifest(const std::string& path,
                        const std::vector<AnnotationRecord>& all_records);

std::uint64_t annotations_fingerprint(const std::vector<AnnotationRecord>& records);

}  // namespace vtad

#endif  // VTAD_DATASET_H_
