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

#include "vtad/catalog.h"

#include "vtad/error.h"
#include "vtad/random.h"
#include "vtad/text.h"

namespace vtad {
namespace {

// Vocabulary table, read row by row (left column, then right column).
constexpr std::array<std::string_view, 18> kVocabulary = {
    "Bright", "Thin",      "Coarse",  "Slim", "Low",         "Pure",
    "Rich",   "Magnetic",  "Muddy",   "Hoarse", "Round",     "Flat",
    "Shrill", "Shriveled", "Muffled", "Soft", "Transparent", "Husky"};

constexpr std::string_view kFemaleOnly = "Shrill";
constexpr std::string_view kMaleOnly = "Husky";

}  // namespace

std::string_view gender_name(Gender g) {
  return g == Gender::kMale ? "Male" : "Female";
}

char gender_code(Gender g) { return g == Gender::kMale ? 'M' : 'F'; }

std::optional<Gender> parse_gender_code(std::string_view s) {
  s = text::trim(s);
  if (s == "M" || s == "m") return Gender::kMale;
  if (s == "F" || s == "f") return Gender::kFemale;
  return std::nullopt;
}

DescriptorCatalog build_catalog() {
  DescriptorCatalog catalog;
  std::vector<std::string_view> common;
  for (std::string_view name : kVocabulary) {
    if (name != kFemaleOnly && name != kMaleOnly) common.push_back(name);
  }
  for (Gender g : {Gender::kMale, Gender::kFemale}) {
    for (std::string_view name : common) catalog.entries_.push_back({std::string(name), g});
    catalog.entries_.push_back(
        {std::string(g == Gender::kMale ? kMaleOnly : kFemaleOnly), g});
  }
  return catalog;
}

std::optional<int> DescriptorCatalog::index_of(const Descriptor& d) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] == d) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> DescriptorCatalog::find(Gender gender, std::string_view name) const {
  const std::string key = text::to_lower(text::trim(name));
  for (int i = block_begin(gender); i < block_end(gender); ++i) {
    if (text::to_lower(entries_[i].name) == key) return i;
  }
  return std::nullopt;
}

std::uint64_t DescriptorCatalog::fingerprint() const {
  std::uint64_t h = fnv1a64("vtad-catalog");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const std::string line = std::to_string(i) + '\t' + gender_code(entries_[i].gender) +
                             '\t' + entries_[i].name + '\n';
    h = fnv1a64(line, h);
  }
  return h;
}

int descriptor_index(const DescriptorCatalog& catalog, Gender gender,
                     std::string_view name) {
  if (auto idx = catalog.find(gender, name)) return *idx;
  throw Error(ErrorCode::kUnknownDescriptor,
              "unknown descriptor '" + std::string(name) + "' for gender " +
                  std::string(gender_name(gender)));
}

std::vector<std::string> default_eval_descriptors(Gender gender) {
  if (gender == Gender::kMale) return {"Bright", "Thin", "Low", "Magnetic", "Pure"};
  return {"Bright", "Thin", "Low", "Coarse", "Slim"};
}

}  // namespace vtad
