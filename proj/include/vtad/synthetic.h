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

#ifndef VTAD_SYNTHETIC_H_
#define VTAD_SYNTHETIC_H_

// Planted-attribute generator for end-to-end checks without audio.
//
// Every synthetic speaker gets one scalar per descriptor of its own gender,
// drawn from N(0, attribute_std^2); the other gender's descriptors stay at
// zero. A random matrix with orthonormal columns maps the 34 scalars into a
// `dim`-dimensional embedding; each utterance adds i.i.d. N(0, sigma^2)
// noise per coordinate. For every same-gender speaker pair, each descriptor
// of that gender whose attribute gap is at least `margin` (in units of
// attribute_std) is annotated in the direction of the true order, and the
// annotated descriptors of one ordered pair are packed into records of at
// most three.

#include <cstdint>
#include <string>
#include <vector>

#include "vtad/catalog.h"
#include "vtad/dataset.h"
#include "vtad/diffnet.h"
#include "vtad/embedding_store.h"

namespace vtad {

struct SyntheticOptions {
  int speakers_per_gender = 25;
  int utterances_per_speaker = 20;
  int dim = 64;
  double attribute_std = 1.0;  // spread of the planted attributes
  double noise_sigma = 0.1;
  double margin = 1.0;
  std::uint64_t seed = 1;
  std::string encoder_tag = "synthetic";
};

struct SyntheticData {
  EmbeddingSet embeddings;
  std::vector<AnnotationRecord> records;
  std::vector<std::string> speakers;  // row order of `attributes`
  Matrix attributes;                  // speakers x catalog dims
  Matrix mixing;                      // dim x catalog dims
};

SyntheticData make_synthetic(const SyntheticOptions& options, const DescriptorCatalog& catalog);

}  // namespace vtad

#endif  // VTAD_SYNTHETIC_H_
