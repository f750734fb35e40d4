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

#ifndef VTAD_DIFFNET_H_
#define VTAD_DIFFNET_H_

// Pairwise comparator: [e_A || e_B] -> FC -> BatchNorm -> ReLU -> Dropout
// -> FC -> sigmoid, one output per catalog descriptor.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vtad/dataset.h"
#include "vtad/embedding_store.h"

namespace vtad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr int kDefaultHiddenSize = 128;

struct DiffNetParams {
  Matrix w1;               // input_dim x hidden
  Vector b1;               // hidden
  Vector bn_gamma;         // hidden
  Vector bn_beta;          // hidden
  Vector bn_running_mean;  // hidden
  Vector bn_running_var;   // hidden
  Matrix w2;               // hidden x output_dim
  Vector b2;               // output_dim
  std::uint64_t catalog_fingerprint = 0;

  int input_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_size() const { return static_cast<int>(w1.cols()); }
  int output_dim() const { return static_cast<int>(w2.cols()); }

  // Throws kShapeMismatch / kNonFiniteValue when an invariant is broken.
  void validate() const;
  bool operator==(const DiffNetParams& o) const;
};

// Gradients for the trainable parameters (running statistics carry none).
struct ParamGradients {
  Matrix w1;
  Vector b1;
  Vector bn_gamma;
  Vector bn_beta;
  Matrix w2;
  Vector b2;
};

enum class Mode { kTrain, kInfer };

struct ForwardCache {
  Mode mode = Mode::kInfer;
  Matrix input;          // B x input_dim
  Matrix normalized;     // batch-normalized pre-activations (x-hat)
  Matrix activated;      // after BN affine + ReLU, before dropout
  Matrix dropout_scale;  // 0 or 1/(1-p) per unit; empty in Infer mode
  Matrix hidden;         // after dropout
  Matrix output;         // sigmoid outputs
  Vector batch_mean;
  Vector batch_var;  // biased
  Vector inv_std;
};

struct ForwardResult {
  Matrix predictions;  // B x output_dim, each entry in (0, 1)
  ForwardCache cache;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dL/d(prediction), same shape as predictions
};

DiffNetParams init_params(int input_dim, int hidden_size, int output_dim,
                          std::uint64_t rng_seed);

// Train mode uses batch statistics and needs at least two rows. The dropout
// mask is a pure function of dropout_seed. Params are not modified; see
// update_running_stats.
ForwardResult forward(const DiffNetParams& params, const Matrix& batch, Mode mode,
                      double dropout_rate = 0.0, std::uint64_t dropout_seed = 0);
// Same, reusing the buffers of `out` across calls.
void forward(const DiffNetParams& params, const Matrix& batch, Mode mode, ForwardResult& out,
             double dropout_rate = 0.0, std::uint64_t dropout_seed = 0);
ForwardResult forward(const DiffNetParams& params, const std::vector<PairVector>& batch,
                      Mode mode, double dropout_rate = 0.0, std::uint64_t dropout_seed = 0);

// Exponential moving average of the batch statistics of a Train-mode pass.
void update_running_stats(DiffNetParams& params, const ForwardCache& cache, double momentum);

// Clamp bound applied to predictions inside the log.
inline constexpr double kBceEps = 1e-7;

// Sum of BCE over labeled dimensions (label != -1), averaged over the batch.
LossResult masked_bce_loss(std::span<const LabelVector> labels, const Matrix& predictions);

ParamGradients backward(const DiffNetParams& params, const ForwardCache& cache,
                        const Matrix& grad_output);
// Same, writing into `out` and reusing its storage across calls.
void backward(const DiffNetParams& params, const ForwardCache& cache, const Matrix& grad_output,
              ParamGradients& out);

double predict_confidence(const DiffNetParams& params, const Embedding& a, const Embedding& b,
                          int descriptor_dim);

}  // namespace vtad

#endif  // VTAD_DIFFNET_H_
