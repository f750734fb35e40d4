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

#include "vtad/synthetic.h"

#include <cmath>
#include <cstdio>

#include <Eigen/QR>

#include "vtad/error.h"
#include "vtad/random.h"

namespace vtad {

SyntheticData make_synthetic(const SyntheticOptions& opt, const DescriptorCatalog& catalog) {
  const int n_attr = catalog.n_dims();
  if (opt.speakers_per_gender < 2 || opt.utterances_per_speaker < 1 || opt.dim < n_attr ||
      !(opt.attribute_std > 0.0) || !(opt.noise_sigma >= 0.0) || !(opt.margin >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "synthetic generator needs >= 2 speakers per gender, >= 1 utterance and dim >= " +
                    std::to_string(n_attr));
  }
  Rng rng(derive_seed(opt.seed, {0x5e7}));
  SyntheticData data;
  data.embeddings = EmbeddingSet(opt.dim, opt.encoder_tag);

  Matrix gaussian(opt.dim, n_attr);
  for (Eigen::Index i = 0; i < gaussian.size(); ++i) gaussian.data()[i] = standard_normal(rng);
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  data.mixing = qr.householderQ() * Matrix::Identity(opt.dim, n_attr);

  const int n_speakers = 2 * opt.speakers_per_gender;
  // A speaker only carries the attributes of its own gender's block; the
  // other block stays at zero.
  data.attributes.setZero(n_speakers, n_attr);
  for (int s = 0; s < n_speakers; ++s) {
    const Gender g = s < opt.speakers_per_gender ? Gender::kMale : Gender::kFemale;
    for (int d = catalog.block_begin(g); d < catalog.block_end(g); ++d)
      data.attributes(s, d) = opt.attribute_std * standard_normal(rng);
  }

  std::vector<Gender> genders;
  for (int s = 0; s < n_speakers; ++s) {
    const Gender g = s < opt.speakers_per_gender ? Gender::kMale : Gender::kFemale;
    const int local = s % opt.speakers_per_gender;
    char id[32];
    std::snprintf(id, sizeof(id), "%c%03d", g == Gender::kMale ? 'm' : 'f', local);
    data.speakers.emplace_back(id);
    genders.push_back(g);

    const Vector clean = data.mixing * data.attributes.row(s).transpose();
    for (int u = 0; u < opt.utterances_per_speaker; ++u) {
      char utt[48];
      std::snprintf(utt, sizeof(utt), "%s_%03d", id, u);
      Embedding e;
      e.speaker_id = id;
      e.utterance_id = utt;
      e.gender = g;
      e.vector.resize(static_cast<std::size_t>(opt.dim));
      for (int k = 0; k < opt.dim; ++k)
        e.vector[k] = clean(k) + opt.noise_sigma * standard_normal(rng);
      data.embeddings.add(std::move(e));
    }
  }

  for (Gender g : {Gender::kMale, Gender::kFemale}) {
    const int base = g == Gender::kMale ? 0 : opt.speakers_per_gender;
    for (int i = 0; i < opt.speakers_per_gender; ++i) {
      for (int j = i + 1; j < opt.speakers_per_gender; ++j) {
        const int si = base + i, sj = base + j;
        // forward: j stronger than i; backward: i stronger than j.
        std::vector<std::string> forward, backward;
        for (int d = catalog.block_begin(g); d < catalog.block_end(g); ++d) {
          const double gap = (data.attributes(sj, d) - data.attributes(si, d)) / opt.attribute_std;
          if (gap >= opt.margin) forward.push_back(catalog.at(d).name);
          if (-gap >= opt.margin) backward.push_back(catalog.at(d).name);
        }
        auto emit = [&](std::vector<std::string>& names, int weaker, int stronger) {
          shuffle(std::span<std::string>(names), rng);
          for (std::size_t k = 0; k < names.size(); k += kMaxDescriptorsPerRecord) {
            AnnotationRecord r;
            r.weaker = data.speakers[weaker];
            r.stronger = data.speakers[stronger];
            r.gender = g;
            const std::size_t end = std::min(names.size(), k + kMaxDescriptorsPerRecord);
            r.descriptors.assign(names.begin() + static_cast<std::ptrdiff_t>(k),
                                 names.begin() + static_cast<std::ptrdiff_t>(end));
            data.records.push_back(std::move(r));
          }
        };
        emit(forward, si, sj);
        emit(backward, sj, si);
      }
    }
  }
  return data;
}

}  // namespace vtad
