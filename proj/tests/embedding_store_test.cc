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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "vtad/embedding_store.h"
#include "vtad/error.h"
#include "test_support.h"

namespace vtad {
namespace {

using testing::code_of;

const char* kSmall =
    "#vtad-emb v1 dim=3 encoder=ecapa-tdnn\n"
    "p225\tp225_001\tF\t0.5,-1,2.25\n"
    "# a comment\n"
    "p225\tp225_002\tF\t1,1,1\n"
    "p226\tp226_001\tM\t-0.125,3e-3,7\n";

TEST(EmbeddingStore, ParsesHeaderAndRecords) {
  const auto set = parse_embedding_set(kSmall);
  EXPECT_EQ(set.dim(), 3);
  EXPECT_EQ(set.encoder_tag(), "ecapa-tdnn");
  EXPECT_EQ(set.size(), 3u);
  EXPECT_EQ(set.speakers(), (std::vector<std::string>{"p225", "p226"}));
  EXPECT_EQ(set.utterances_of("p225"), (std::vector<std::string>{"p225_001", "p225_002"}));
  EXPECT_EQ(set.gender_of("p226"), Gender::kMale);
  const auto& e = get_embedding(set, "p226", "p226_001");
  EXPECT_EQ(e.vector, (std::vector<double>{-0.125, 3e-3, 7}));
}

TEST(EmbeddingStore, SerializeRoundTripIsExact) {
  EmbeddingSet set(4, "facodec");
  for (int i = 0; i < 5; ++i) {
    Embedding e{"s" + std::to_string(i % 2),
                "u" + std::to_string(i),
                i % 2 ? Gender::kMale : Gender::kFemale,
                {0.1 * i, 1.0 / 3.0, -std::sqrt(2.0) * i, 1e-300}};
    set.add(e);
  }
  const auto again = parse_embedding_set(serialize_embedding_set(set));
  EXPECT_EQ(again.encoder_tag(), "facodec");
  ASSERT_EQ(again.size(), set.size());
  for (const auto& [key, e] : set.entries()) {
    const auto& other = get_embedding(again, key.speaker, key.utterance);
    EXPECT_EQ(other.vector, e.vector);
    EXPECT_EQ(other.gender, e.gender);
  }
  EXPECT_EQ(serialize_embedding_set(again), serialize_embedding_set(set));
}

TEST(EmbeddingStore, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "vtad_emb_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "emb.tsv").string();
  const auto set = parse_embedding_set(kSmall);
  save_embedding_set(set, path);
  EXPECT_EQ(serialize_embedding_set(load_embedding_set(path)), serialize_embedding_set(set));
  std::filesystem::remove_all(dir);
  EXPECT_EQ(code_of([&] { load_embedding_set(path); }), ErrorCode::kIoError);
}

TEST(EmbeddingStore, RejectsBadHeader) {
  EXPECT_EQ(code_of([] { parse_embedding_set("p1\tu1\tM\t1,2\n"); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v2 dim=2 encoder=x\n"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=0 encoder=x\n"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse_embedding_set(""); }), ErrorCode::kFormatError);
}

TEST(EmbeddingStore, DimensionMismatchNamesTheLine) {
  const std::string text = "#vtad-emb v1 dim=2 encoder=x\np1\tu1\tM\t1,2\np1\tu2\tM\t1,2,3\n";
  try {
    parse_embedding_set(text, "emb.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("emb.tsv:3"), std::string::npos) << e.what();
  }
}

TEST(EmbeddingStore, RejectsNonFiniteValues) {
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=2 encoder=x\np\tu\tM\tnan,1\n"); }),
            ErrorCode::kNonFiniteValue);
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=2 encoder=x\np\tu\tM\t1,inf\n"); }),
            ErrorCode::kNonFiniteValue);
  EmbeddingSet set(1, "x");
  EXPECT_EQ(code_of([&] {
              set.add({"p", "u", Gender::kMale, {std::numeric_limits<double>::quiet_NaN()}});
            }),
            ErrorCode::kNonFiniteValue);
}

TEST(EmbeddingStore, RejectsDuplicatesAndGenderConflicts) {
  EmbeddingSet set(1, "x");
  set.add({"p", "u1", Gender::kMale, {1.0}});
  EXPECT_EQ(code_of([&] { set.add({"p", "u1", Gender::kMale, {2.0}}); }), ErrorCode::kDuplicateKey);
  EXPECT_EQ(code_of([&] { set.add({"p", "u2", Gender::kFemale, {2.0}}); }),
            ErrorCode::kInconsistentGender);
  EXPECT_EQ(set.size(), 1u);
}

TEST(EmbeddingStore, RejectsMalformedRecords) {
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=1 encoder=x\np\tu\tQ\t1\n"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=1 encoder=x\np\tu\tM\n"); }),
            ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse_embedding_set("#vtad-emb v1 dim=1 encoder=x\np\tu\tM\tabc\n"); }),
            ErrorCode::kFormatError);
}

TEST(EmbeddingStore, MissingLookups) {
  const auto set = parse_embedding_set(kSmall);
  EXPECT_EQ(code_of([&] { get_embedding(set, "p225", "p225_999"); }), ErrorCode::kMissingEmbedding);
  EXPECT_EQ(code_of([&] { set.gender_of("nobody"); }), ErrorCode::kMissingEmbedding);
  EXPECT_TRUE(set.utterances_of("nobody").empty());
}

TEST(EmbeddingStore, PairEmbeddingConcatenatesInOrder) {
  const auto set = parse_embedding_set(kSmall);
  const auto& a = get_embedding(set, "p225", "p225_001");
  const auto& b = get_embedding(set, "p226", "p226_001");
  EXPECT_EQ(pair_embedding(a, b), (PairVector{0.5, -1, 2.25, -0.125, 3e-3, 7}));
  EXPECT_EQ(pair_embedding(b, a), (PairVector{-0.125, 3e-3, 7, 0.5, -1, 2.25}));
  std::vector<double> out(6);
  pair_embedding_into(a.vector, b.vector, out);
  EXPECT_EQ(out, pair_embedding(a, b));
}

TEST(EmbeddingStore, PairEmbeddingRejectsDimensionMismatch) {
  Embedding a{"a", "1", Gender::kMale, {1.0, 2.0}};
  Embedding b{"b", "1", Gender::kMale, {1.0}};
  EXPECT_EQ(code_of([&] { pair_embedding(a, b); }), ErrorCode::kDimensionMismatch);
}

}  // namespace
}  // namespace vtad
