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

#include "vtad/diffnet.h"

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "vtad/error.h"
#include "vtad/random.h"

namespace vtad {
namespace {

// Largest double below 1; sigmoid outputs stay inside the open interval.
constexpr double kMaxProb = 1.0 - 0x1.0p-53;
constexpr double kMinProb = std::numeric_limits<double>::min();


// Messages are either literals or built lazily, so passing checks stays cheap
// on the training path.
void require(bool ok, ErrorCode code, const char* what) {
  if (!ok) throw Error(code, what);
}

template <std::invocable F>
void require(bool ok, ErrorCode code, F&& what) {
  if (!ok) throw Error(code, what());
}

template <typename M>
bool all_finite(const M& m) {
  return m.allFinite();
}

}  // namespace

void DiffNetParams::validate() const {
  const auto h = w1.cols();
  require(w1.rows() >= 1 && h >= 1 && w2.cols() >= 1, ErrorCode::kShapeMismatch,
          "empty parameter matrix");
  require(b1.size() == h && bn_gamma.size() == h && bn_beta.size() == h &&
              bn_running_mean.size() == h && bn_running_var.size() == h && w2.rows() == h &&
              b2.size() == w2.cols(),
          ErrorCode::kShapeMismatch, "inconsistent parameter shapes");
  require(all_finite(w1) && all_finite(b1) && all_finite(bn_gamma) && all_finite(bn_beta) &&
              all_finite(bn_running_mean) && all_finite(bn_running_var) && all_finite(w2) &&
              all_finite(b2),
          ErrorCode::kNonFiniteValue, "non-finite parameter");
  require((bn_running_var.array() >= 0.0).all(), ErrorCode::kNonFiniteValue,
          "negative running variance");
}

bool DiffNetParams::operator==(const DiffNetParams& o) const {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  return catalog_fingerprint == o.catalog_fingerprint && same(w1, o.w1) && same(b1, o.b1) &&
         same(bn_gamma, o.bn_gamma) && same(bn_beta, o.bn_beta) &&
         same(bn_running_mean, o.bn_running_mean) && same(bn_running_var, o.bn_running_var) &&
         same(w2, o.w2) && same(b2, o.b2);
}

DiffNetParams init_params(int input_dim, int hidden_size, int output_dim,
                          std::uint64_t rng_seed) {
  require(input_dim >= 1 && hidden_size >= 1 && output_dim >= 1, ErrorCode::kShapeMismatch,
          "network dimensions must be >= 1");
  Rng rng(derive_seed(rng_seed, {0x1a17}));
  DiffNetParams p;
  // Fan-in scaled uniform, bound sqrt(6 / fan_in).
  const double bound1 = std::sqrt(6.0 / input_dim);
  const double bound2 = std::sqrt(6.0 / hidden_size);
  p.w1.resize(input_dim, hidden_size);
  for (Eigen::Index i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = uniform(rng, -bound1, bound1);
  p.w2.resize(hidden_size, output_dim);
  for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = uniform(rng, -bound2, bound2);
  p.b1 = Vector::Zero(hidden_size);
  p.bn_gamma = Vector::Ones(hidden_size);
  p.bn_beta = Vector::Zero(hidden_size);
  p.bn_running_mean = Vector::Zero(hidden_size);
  p.bn_running_var = Vector::Ones(hidden_size);
  p.b2 = Vector::Zero(output_dim);
  return p;
}

ForwardResult forward(const DiffNetParams& params, const Matrix& batch, Mode mode,
                      double dropout_rate, std::uint64_t dropout_seed) {
  ForwardResult res;
  forward(params, batch, mode, res, dropout_rate, dropout_seed);
  return res;
}

void forward(const DiffNetParams& params, const Matrix& batch, Mode mode, ForwardResult& res,
             double dropout_rate, std::uint64_t dropout_seed) {
  const Eigen::Index n = batch.rows();
  require(n >= 1, ErrorCode::kEmptyInput, "empty batch");
  require(batch.cols() == params.input_dim(), ErrorCode::kDimensionMismatch, [&] {
    return "batch has " + std::to_string(batch.cols()) + " columns, network expects " +
           std::to_string(params.input_dim());
  });
  require(mode == Mode::kInfer || n >= 2, ErrorCode::kDegenerateBatch,
          "training batches need at least 2 samples");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorCode::kInvalidConfig,
          "dropout rate must lie in [0, 1)");

  ForwardCache& c = res.cache;
  c.mode = mode;
  c.input = batch;

  // `normalized` first holds the centred pre-activations.
  Matrix& pre = c.normalized;
  pre.resize(n, params.hidden_size());
  pre.noalias() = batch * params.w1;
  pre.rowwise() += params.b1.transpose();
  if (mode == Mode::kTrain) {
    c.batch_mean = pre.colwise().mean().transpose();
    pre.rowwise() -= c.batch_mean.transpose();
    c.batch_var = pre.array().square().colwise().mean().transpose();
  } else {
    c.batch_mean = params.bn_running_mean;
    pre.rowwise() -= c.batch_mean.transpose();
    c.batch_var = params.bn_running_var;
  }
  c.inv_std = (c.batch_var.array() + kBatchNormEps).rsqrt().matrix();
  pre.array().rowwise() *= c.inv_std.transpose().array();

  c.activated = ((c.normalized.array().rowwise() * params.bn_gamma.transpose().array()).rowwise() +
                 params.bn_beta.transpose().array())
                    .cwiseMax(0.0)
                    .matrix();

  if (mode == Mode::kTrain && dropout_rate > 0.0) {
    // Counter-based draws: unit i of the batch uses the i-th output of a
    // SplitMix64 stream keyed by the seed.
    const std::uint64_t key = splitmix64(dropout_seed);
    const double keep_scale = 1.0 / (1.0 - dropout_rate);
    c.dropout_scale.resize(n, params.hidden_size());
    for (Eigen::Index i = 0; i < c.dropout_scale.size(); ++i) {
      const std::uint64_t bits = splitmix64(key + static_cast<std::uint64_t>(i) * kSplitMixGamma);
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      c.dropout_scale.data()[i] = u < dropout_rate ? 0.0 : keep_scale;
    }
    c.hidden = c.activated.cwiseProduct(c.dropout_scale);
  } else {
    c.dropout_scale.resize(0, 0);
    c.hidden = c.activated;
  }

  c.output.resize(n, params.output_dim());
  c.output.noalias() = c.hidden * params.w2;
  c.output.rowwise() += params.b2.transpose();
  c.output = c.output.array().logistic().max(kMinProb).min(kMaxProb).matrix();
  res.predictions = c.output;
}

ForwardResult forward(const DiffNetParams& params, const std::vector<PairVector>& batch,
                      Mode mode, double dropout_rate, std::uint64_t dropout_seed) {
  require(!batch.empty(), ErrorCode::kEmptyInput, "empty batch");
  Matrix x(static_cast<Eigen::Index>(batch.size()), params.input_dim());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    require(static_cast<Eigen::Index>(batch[i].size()) == x.cols(), ErrorCode::kDimensionMismatch,
            [&] {
              return "pair vector of length " + std::to_string(batch[i].size()) +
                     ", network expects " + std::to_string(x.cols());
            });
    x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(
        batch[i].data(), static_cast<Eigen::Index>(batch[i].size()));
  }
  return forward(params, x, mode, dropout_rate, dropout_seed);
}

void update_running_stats(DiffNetParams& params, const ForwardCache& cache, double momentum) {
  require(cache.mode == Mode::kTrain, ErrorCode::kStaleCache,
          "running statistics need a Train-mode pass");
  const double n = static_cast<double>(cache.input.rows());
  // Running variance tracks the unbiased estimate.
  const Vector unbiased = cache.batch_var * (n / (n - 1.0));
  params.bn_running_mean = (1.0 - momentum) * params.bn_running_mean + momentum * cache.batch_mean;
  params.bn_running_var = (1.0 - momentum) * params.bn_running_var + momentum * unbiased;
}

LossResult masked_bce_loss(std::span<const LabelVector> labels, const Matrix& predictions) {
  require(static_cast<Eigen::Index>(labels.size()) == predictions.rows(),
          ErrorCode::kShapeMismatch, [&] {
            return std::to_string(labels.size()) + " label vectors for " +
                   std::to_string(predictions.rows()) + " predictions";
          });
  require(!labels.empty(), ErrorCode::kEmptyInput, "empty batch");
  const double inv_batch = 1.0 / static_cast<double>(labels.size());
  LossResult res;
  res.grad = Matrix::Zero(predictions.rows(), predictions.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i].values;
    require(static_cast<Eigen::Index>(l.size()) == predictions.cols(), ErrorCode::kShapeMismatch,
            [&] {
              return "label vector length " + std::to_string(l.size()) + " vs " +
                     std::to_string(predictions.cols()) + " outputs";
            });
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index n = 0; n < predictions.cols(); ++n) {
      const int label = l[static_cast<std::size_t>(n)];
      if (label == -1) continue;
      if (label != 0 && label != 1)
        throw Error(ErrorCode::kShapeMismatch, "label value " + std::to_string(label));
      const double y = std::clamp(predictions(row, n), kBceEps, 1.0 - kBceEps);
      if (label == 1) {
        res.loss -= std::log(y) * inv_batch;
        res.grad(row, n) = -inv_batch / y;
      } else {
        res.loss -= std::log(1.0 - y) * inv_batch;
        res.grad(row, n) = inv_batch / (1.0 - y);
      }
    }
  }
  return res;
}

ParamGradients backward(const DiffNetParams& params, const ForwardCache& cache,
                        const Matrix& grad_output) {
  ParamGradients g;
  backward(params, cache, grad_output, g);
  return g;
}

void backward(const DiffNetParams& params, const ForwardCache& cache, const Matrix& grad_output,
              ParamGradients& g) {
  const Eigen::Index n = cache.input.rows();
  const Eigen::Index h = params.hidden_size();
  require(cache.mode == Mode::kTrain, ErrorCode::kStaleCache, "backward needs a Train-mode cache");
  require(cache.input.cols() == params.input_dim() && cache.hidden.cols() == h &&
              cache.output.cols() == params.output_dim() && cache.hidden.rows() == n,
          ErrorCode::kStaleCache, "forward cache does not match the parameter shapes");
  require(grad_output.rows() == n && grad_output.cols() == params.output_dim(),
          ErrorCode::kShapeMismatch, "grad_output shape does not match predictions");

  // Through the sigmoid.
  const Matrix d_logits =
      grad_output.cwiseProduct(cache.output.cwiseProduct((1.0 - cache.output.array()).matrix()));
  g.w2.resize(h, params.output_dim());
  g.w2.noalias() = cache.hidden.transpose() * d_logits;
  g.b2 = d_logits.colwise().sum().transpose();

  Matrix d_hidden = d_logits * params.w2.transpose();
  if (cache.dropout_scale.size() != 0) d_hidden = d_hidden.cwiseProduct(cache.dropout_scale);
  // ReLU: pass gradient where the activation is positive.
  const Matrix d_bn_out =
      d_hidden.cwiseProduct((cache.activated.array() > 0.0).cast<double>().matrix());

  g.bn_gamma = d_bn_out.cwiseProduct(cache.normalized).colwise().sum().transpose();
  g.bn_beta = d_bn_out.colwise().sum().transpose();

  // Batch-norm input gradient with batch statistics:
  // dz = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
  const Matrix d_xhat = d_bn_out.array().rowwise() * params.bn_gamma.transpose().array();
  const Eigen::RowVectorXd sum_dx = d_xhat.colwise().sum();
  const Eigen::RowVectorXd sum_dx_xhat = d_xhat.cwiseProduct(cache.normalized).colwise().sum();
  Matrix d_pre = static_cast<double>(n) * d_xhat;
  d_pre.rowwise() -= sum_dx;
  d_pre -= (cache.normalized.array().rowwise() * sum_dx_xhat.array()).matrix();
  d_pre = (d_pre.array().rowwise() * (cache.inv_std.transpose().array() / static_cast<double>(n)))
              .matrix();

  g.w1.resize(params.input_dim(), h);
  g.w1.noalias() = cache.input.transpose() * d_pre;
  g.b1 = d_pre.colwise().sum().transpose();
}

double predict_confidence(const DiffNetParams& params, const Embedding& a, const Embedding& b,
                          int descriptor_dim) {
  require(descriptor_dim >= 0 && descriptor_dim < params.output_dim(),
          ErrorCode::kDimensionMismatch, [&] {
            return "descriptor index " + std::to_string(descriptor_dim) + " outside [0, " +
                   std::to_string(params.output_dim()) + ")";
          });
  Matrix x(1, params.input_dim());
  require(a.dim() + b.dim() == params.input_dim(), ErrorCode::kDimensionMismatch, [&] {
    return "embedding pair of length " + std::to_string(a.dim() + b.dim()) +
           ", network expects " + std::to_string(params.input_dim());
  });
  pair_embedding_into(a.vector, b.vector, std::span<double>(x.data(), x.size()));
  return forward(params, x, Mode::kInfer).predictions(0, descriptor_dim);
}

}  // namespace vtad
