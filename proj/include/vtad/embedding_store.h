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

#ifndef VTAD_EMBEDDING_STORE_H_
#define VTAD_EMBEDDING_STORE_H_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vtad/catalog.h"

namespace vtad {

struct UtteranceKey {
  std::string speaker;
  std::string utterance;

  auto operator<=>(const UtteranceKey&) const = default;
};

struct Embedding {
  std::string speaker_id;
  std::string utterance_id;
  Gender gender = Gender::kMale;
  std::vector<double> vector;

  int dim() const { return static_cast<int>(vector.size()); }
};

// Concatenation [a || b], the network input for the ordered pair (a, b).
using PairVector = std::vector<double>;

class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(int dim, std::string encoder_tag)
      : dim_(dim), encoder_tag_(std::move(encoder_tag)) {}

  int dim() const { return dim_; }
  const std::string& encoder_tag() const { return encoder_tag_; }
  std::size_t size() const { return entries_.size(); }
  const std::map<UtteranceKey, Embedding>& entries() const { return entries_; }

  // Validates dimension, finiteness, key uniqueness and gender consistency.
  void add(Embedding e);

  bool contains(const UtteranceKey& key) const { return entries_.count(key) != 0; }
  // Sorted utterance ids for one speaker (empty if unknown).
  std::vector<std::string> utterances_of(const std::string& speaker) const;
  std::vector<std::string> speakers() const;
  // Throws kMissingEmbedding for unknown speakers.
  Gender gender_of(const std::string& speaker) const;

 private:
  int dim_ = 0;
  std::string encoder_tag_;
  std::map<UtteranceKey, Embedding> entries_;
  std::map<std::string, Gender> speaker_gender_;
  std::map<std::string, std::vector<std::string>> by_speaker_;
};

EmbeddingSet parse_embedding_set(const std::string& contents,
                                 const std::string& source = "<memory>");
EmbeddingSet load_embedding_set(const std::string& path);
std::string serialize_embedding_set(const EmbeddingSet& set);
void save_embedding_set(const EmbeddingSet& set, const std::string& path);

const Embedding& get_embedding(const EmbeddingSet& set, const std::string& speaker_id,
                               const std::string& utterance_id);

PairVector pair_embedding(const Embedding& a, const Embedding& b);
// Same, written into an existing row buffer of length a.size() + b.size().
void pair_embedding_into(std::span<const double> a, std::span<const double> b,
                         std::span<double> out);

}  // namespace vtad

#endif  // VTAD_EMBEDDING_STORE_H_
