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

#include "vtad/trainer.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "vtad/error.h"
#include "vtad/random.h"
#include "vtad/text.h"

namespace vtad {
namespace {

constexpr std::uint64_t kStreamShuffle = 11;
constexpr std::uint64_t kStreamDropout = 12;

class AdamState {
 public:
  explicit AdamState(const DiffNetParams& p)
      : m_(zeros_like(p)), v_(zeros_like(p)) {}

  void step(DiffNetParams& p, const ParamGradients& g, const TrainConfig& cfg) {
    ++t_;
    // Bias corrections folded into two scalars:
    // lr * (m / c1) / (sqrt(v / c2) + eps).
    const double step_size = cfg.learning_rate / (1.0 - std::pow(cfg.adam_beta1, t_));
    const double inv_sqrt_c2 = 1.0 / std::sqrt(1.0 - std::pow(cfg.adam_beta2, t_));
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
      param.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_c2 + cfg.adam_eps);
    };
    update(p.w1, g.w1, m_.w1, v_.w1);
    update(p.b1, g.b1, m_.b1, v_.b1);
    update(p.bn_gamma, g.bn_gamma, m_.bn_gamma, v_.bn_gamma);
    update(p.bn_beta, g.bn_beta, m_.bn_beta, v_.bn_beta);
    update(p.w2, g.w2, m_.w2, v_.w2);
    update(p.b2, g.b2, m_.b2, v_.b2);
  }

 private:
  static ParamGradients zeros_like(const DiffNetParams& p) {
    return {Matrix::Zero(p.w1.rows(), p.w1.cols()), Vector::Zero(p.b1.size()),
            Vector::Zero(p.bn_gamma.size()),        Vector::Zero(p.bn_beta.size()),
            Matrix::Zero(p.w2.rows(), p.w2.cols()), Vector::Zero(p.b2.size())};
  }

  ParamGradients m_, v_;
  long t_ = 0;
};

void sgd_step(DiffNetParams& p, const ParamGradients& g, double lr) {
  p.w1 -= lr * g.w1;
  p.b1 -= lr * g.b1;
  p.bn_gamma -= lr * g.bn_gamma;
  p.bn_beta -= lr * g.bn_beta;
  p.w2 -= lr * g.w2;
  p.b2 -= lr * g.b2;
}

struct ResolvedSample {
  const std::vector<double>* a;
  const std::vector<double>* b;
  const LabelVector* label;
};

}  // namespace

std::string_view optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }

std::optional<Optimizer> parse_optimizer(std::string_view s) {
  const std::string key = text::to_lower(text::trim(s));
  if (key == "adam") return Optimizer::kAdam;
  if (key == "sgd") return Optimizer::kSgd;
  return std::nullopt;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) fail("bn_momentum must lie in (0, 1]");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    fail("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps must be > 0");
  if (hidden_size < 1) fail("hidden_size must be >= 1");
}

double default_learning_rate(std::string_view encoder_tag) {
  return text::to_lower(encoder_tag).find("facodec") != std::string::npos ? kFacodecLearningRate
                                                                          : kEcapaLearningRate;
}

TrainResult train(const TrainConfig& config, const std::vector<TrainingSample>& samples,
                  const EmbeddingSet& embeddings, const DescriptorCatalog& catalog) {
  config.validate();
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no training samples");

  std::vector<ResolvedSample> resolved;
  resolved.reserve(samples.size());
  for (const auto& s : samples) {
    validate_training_sample(s, catalog, embeddings.gender_of(s.utt_a.speaker));
    const auto& a = get_embedding(embeddings, s.utt_a.speaker, s.utt_a.utterance);
    const auto& b = get_embedding(embeddings, s.utt_b.speaker, s.utt_b.utterance);
    if (b.gender != a.gender) {
      throw Error(ErrorCode::kInconsistentGender,
                  "training sample pairs " + a.speaker_id + " with " + b.speaker_id +
                      " across genders");
    }
    resolved.push_back({&a.vector, &b.vector, &s.label});
  }

  const int dim = embeddings.dim();
  TrainResult result;
  result.params = init_params(2 * dim, config.hidden_size, catalog.n_dims(), config.rng_seed);
  result.params.catalog_fingerprint = catalog.fingerprint();
  DiffNetParams& params = result.params;

  AdamState adam(params);
  std::vector<std::size_t> order(resolved.size());
  std::vector<LabelVector> labels;
  Matrix batch;
  ForwardResult fwd;
  ParamGradients grads;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.rng_seed, {kStreamShuffle, static_cast<std::uint64_t>(epoch)}));
    shuffle(std::span<std::size_t>(order), rng);

    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0, batch_no = 0; start < order.size(); start += bs, ++batch_no) {
      const std::size_t n = std::min(bs, order.size() - start);
      if (n < 2) {
        stats.dropped += n;
        continue;
      }
      batch.resize(static_cast<Eigen::Index>(n), 2 * dim);
      labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& s = resolved[order[start + i]];
        pair_embedding_into(*s.a, *s.b,
                            std::span<double>(batch.row(static_cast<Eigen::Index>(i)).data(),
                                              static_cast<std::size_t>(2 * dim)));
        labels[i].values.assign(s.label->values.begin(), s.label->values.end());
      }
      const std::uint64_t dropout_seed = derive_seed(
          config.rng_seed, {kStreamDropout, static_cast<std::uint64_t>(epoch), batch_no});
      forward(params, batch, Mode::kTrain, fwd, config.dropout_rate, dropout_seed);
      const LossResult loss = masked_bce_loss(labels, fwd.predictions);
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                                   ", batch " + std::to_string(batch_no));
      }
      backward(params, fwd.cache, loss.grad, grads);
      update_running_stats(params, fwd.cache, config.bn_momentum);
      if (config.optimizer == Optimizer::kAdam) {
        adam.step(params, grads, config);
      } else {
        sgd_step(params, grads, config.learning_rate);
      }
      loss_sum += loss.loss * static_cast<double>(n);
      stats.samples += n;
      ++stats.batches;
    }
    if (stats.samples == 0)
      throw Error(ErrorCode::kDegenerateBatch, "no batch of at least 2 samples");
    stats.mean_loss = loss_sum / static_cast<double>(stats.samples);
    result.log.push_back(stats);
  }
  params.validate();
  return result;
}

std::string format_train_log(const std::vector<EpochStats>& log) {
  std::string out = "epoch\tmean_loss\tbatches\tsamples\tdropped\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + '\t' + text::format_double(e.mean_loss) + '\t' +
           std::to_string(e.batches) + '\t' + std::to_string(e.samples) + '\t' +
           std::to_string(e.dropped) + '\n';
  }
  return out;
}

}  // namespace vtad
