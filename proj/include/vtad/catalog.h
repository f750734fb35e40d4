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

#ifndef VTAD_CATALOG_H_
#define VTAD_CATALOG_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vtad {

enum class Gender { kMale, kFemale };

std::string_view gender_name(Gender g);   // "Male" / "Female"
char gender_code(Gender g);               // 'M' / 'F'
std::optional<Gender> parse_gender_code(std::string_view s);

struct Descriptor {
  std::string name;  // canonical capitalization, e.g. "Bright"
  Gender gender;

  bool operator==(const Descriptor&) const = default;
};

// The timbre descriptor vocabulary and its layout in the model's output
// space. Male descriptors occupy [0, 17), female descriptors [17, 34), each
// block in the same order; the last slot of each block holds the
// gender-exclusive descriptor (Husky for male, Shrill for female).
class DescriptorCatalog {
 public:
  static constexpr int kPerGender = 17;
  static constexpr int kDims = 2 * kPerGender;

  int n_dims() const { return static_cast<int>(entries_.size()); }
  const std::vector<Descriptor>& entries() const { return entries_; }
  const Descriptor& at(int index) const { return entries_.at(index); }

  // Index of an exact catalog entry, or nullopt.
  std::optional<int> index_of(const Descriptor& d) const;
  // Case-insensitive lookup; nullopt if the pair is not in the vocabulary.
  std::optional<int> find(Gender gender, std::string_view name) const;

  Gender gender_of(int index) const { return entries_.at(index).gender; }
  int block_begin(Gender g) const { return g == Gender::kMale ? 0 : kPerGender; }
  int block_end(Gender g) const { return block_begin(g) + kPerGender; }

  // Hash of the (index, gender, name) layout; stored in checkpoints.
  std::uint64_t fingerprint() const;

 private:
  friend DescriptorCatalog build_catalog();
  std::vector<Descriptor> entries_;
};

DescriptorCatalog build_catalog();

// Throws Error(kUnknownDescriptor) for names outside the gender's vocabulary.
int descriptor_index(const DescriptorCatalog& catalog, Gender gender,
                     std::string_view name);

// Descriptors evaluated in the unseen and seen-speaker scenarios by default.
std::vector<std::string> default_eval_descriptors(Gender gender);

}  // namespace vtad

#endif  // VTAD_CATALOG_H_
