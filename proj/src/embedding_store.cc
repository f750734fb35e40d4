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

#include "vtad/embedding_store.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vtad/error.h"
#include "vtad/text.h"

namespace vtad {
namespace {

constexpr std::string_view kMagic = "#vtad-emb";

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

void EmbeddingSet::add(Embedding e) {
  if (e.dim() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding " + e.speaker_id + "/" + e.utterance_id + " has " +
                    std::to_string(e.dim()) + " values, expected " + std::to_string(dim_));
  }
  for (double v : e.vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite value in embedding " + e.speaker_id + "/" + e.utterance_id);
    }
  }
  UtteranceKey key{e.speaker_id, e.utterance_id};
  if (entries_.count(key)) {
    throw Error(ErrorCode::kDuplicateKey,
                "duplicate embedding key " + e.speaker_id + "/" + e.utterance_id);
  }
  auto [it, inserted] = speaker_gender_.emplace(e.speaker_id, e.gender);
  if (!inserted && it->second != e.gender) {
    throw Error(ErrorCode::kInconsistentGender,
                "speaker " + e.speaker_id + " tagged both " +
                    std::string(gender_name(it->second)) + " and " +
                    std::string(gender_name(e.gender)));
  }
  auto& utts = by_speaker_[e.speaker_id];
  utts.insert(std::upper_bound(utts.begin(), utts.end(), e.utterance_id), e.utterance_id);
  entries_.emplace(std::move(key), std::move(e));
}

std::vector<std::string> EmbeddingSet::utterances_of(const std::string& speaker) const {
  auto it = by_speaker_.find(speaker);
  return it == by_speaker_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> EmbeddingSet::speakers() const {
  std::vector<std::string> out;
  out.reserve(by_speaker_.size());
  for (const auto& [spk, _] : by_speaker_) out.push_back(spk);
  return out;
}

Gender EmbeddingSet::gender_of(const std::string& speaker) const {
  auto it = speaker_gender_.find(speaker);
  if (it == speaker_gender_.end())
    throw Error(ErrorCode::kMissingEmbedding, "no embeddings for speaker " + speaker);
  return it->second;
}

EmbeddingSet parse_embedding_set(const std::string& contents, const std::string& source) {
  std::istringstream in(contents);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw Error(ErrorCode::kFormatError, source + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Header: #vtad-emb v1 dim=<D> encoder=<tag>
  std::istringstream header(line);
  std::string magic, version, dim_field, encoder_field;
  header >> magic >> version >> dim_field >> encoder_field;
  if (magic != kMagic || version != "v1" || dim_field.rfind("dim=", 0) != 0 ||
      encoder_field.rfind("encoder=", 0) != 0) {
    throw Error(ErrorCode::kFormatError,
                where(source, lineno) + "expected '#vtad-emb v1 dim=<D> encoder=<tag>'");
  }
  auto dim = text::parse_int(std::string_view(dim_field).substr(4));
  if (!dim || *dim < 1) {
    throw Error(ErrorCode::kFormatError, where(source, lineno) + "bad dim: " + dim_field);
  }
  EmbeddingSet set(static_cast<int>(*dim), encoder_field.substr(8));

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
    Embedding e;
    e.speaker_id = std::string(text::trim(fields[0]));
    e.utterance_id = std::string(text::trim(fields[1]));
    if (e.speaker_id.empty() || e.utterance_id.empty())
      throw Error(ErrorCode::kFormatError, where(source, lineno) + "empty speaker or utterance id");
    auto gender = parse_gender_code(fields[2]);
    if (!gender)
      throw Error(ErrorCode::kFormatError, where(source, lineno) + "gender must be M or F");
    e.gender = *gender;
    for (std::string_view tok : text::split(fields[3], ',')) {
      auto v = text::parse_double(tok);
      if (!v) {
        const std::string lowered = text::to_lower(text::trim(tok));
        if (lowered.find("nan") != std::string::npos || lowered.find("inf") != std::string::npos)
          throw Error(ErrorCode::kNonFiniteValue, where(source, lineno) + "non-finite value '" +
                                                      std::string(tok) + "'");
        throw Error(ErrorCode::kFormatError,
                    where(source, lineno) + "bad number '" + std::string(tok) + "'");
      }
      e.vector.push_back(*v);
    }
    try {
      set.add(std::move(e));
    } catch (const Error& err) {
      throw Error(err.code(), where(source, lineno) + err.what());
    }
  }
  return set;
}

EmbeddingSet load_embedding_set(const std::string& path) {
  return parse_embedding_set(text::read_file(path), path);
}

std::string serialize_embedding_set(const EmbeddingSet& set) {
  std::string out = std::string(kMagic) + " v1 dim=" + std::to_string(set.dim()) +
                    " encoder=" + set.encoder_tag() + "\n";
  for (const auto& [key, e] : set.entries()) {
    out += e.speaker_id;
    out += '\t';
    out += e.utterance_id;
    out += '\t';
    out += gender_code(e.gender);
    out += '\t';
    for (std::size_t i = 0; i < e.vector.size(); ++i) {
      if (i) out += ',';
      out += text::format_double(e.vector[i]);
    }
    out += '\n';
  }
  return out;
}

void save_embedding_set(const EmbeddingSet& set, const std::string& path) {
  text::write_file_atomic(path, serialize_embedding_set(set));
}

const Embedding& get_embedding(const EmbeddingSet& set, const std::string& speaker_id,
                               const std::string& utterance_id) {
  auto it = set.entries().find(UtteranceKey{speaker_id, utterance_id});
  if (it == set.entries().end()) {
    throw Error(ErrorCode::kMissingEmbedding,
                "missing embedding for " + speaker_id + "/" + utterance_id);
  }
  return it->second;
}

PairVector pair_embedding(const Embedding& a, const Embedding& b) {
  PairVector out(a.vector.size() + b.vector.size());
  pair_embedding_into(a.vector, b.vector, out);
  return out;
}

void pair_embedding_into(std::span<const double> a, std::span<const double> b,
                         std::span<double> out) {
  if (a.size() != b.size() || out.size() != a.size() + b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot pair embeddings of dimension " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
}

}  // namespace vtad
