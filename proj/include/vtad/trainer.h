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

#ifndef VTAD_TRAINER_H_
#define VTAD_TRAINER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtad/catalog.h"
#include "vtad/dataset.h"
#include "vtad/diffnet.h"
#include "vtad/embedding_store.h"

namespace vtad {

enum class Optimizer { kAdam, kSgd };

std::string_view optimizer_name(Optimizer o);
std::optional<Optimizer> parse_optimizer(std::string_view s);

inline constexpr double kEcapaLearningRate = 5e-5;
inline constexpr double kFacodecLearningRate = 2.5e-5;

struct TrainConfig {
  double learning_rate = kEcapaLearningRate;
  int batch_size = 16;
  int epochs = 10;
  double dropout_rate = 0.2;
  double bn_momentum = 0.1;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int hidden_size = kDefaultHiddenSize;
  std::uint64_t rng_seed = 0;

  // Throws kInvalidConfig.
  void validate() const;
};

// Default learning rate for an embedding set, keyed on its encoder tag:
// FACodec timbre embeddings train at 2.5e-5, everything else at 5e-5.
double default_learning_rate(std::string_view encoder_tag);

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t batches = 0;
  std::size_t samples = 0;
  std::size_t dropped = 0;  // trailing samples that did not fill a batch of 2
};

struct TrainResult {
  DiffNetParams params;
  std::vector<EpochStats> log;
};

// Single-threaded and deterministic for a given (config, samples, embeddings).
TrainResult train(const TrainConfig& config, const std::vector<TrainingSample>& samples,
                  const EmbeddingSet& embeddings, const DescriptorCatalog& catalog);

std::string format_train_log(const std::vector<EpochStats>& log);

}  // namespace vtad

#endif  // VTAD_TRAINER_H_
