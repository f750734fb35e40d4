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

#ifndef VTAD_TESTS_ORACLES_H_
#define VTAD_TESTS_ORACLES_H_

// Independent reference implementations used to check the library: plain
// loops instead of Eigen expressions, brute-force counting instead of sorted
// sweeps, finite differences instead of backpropagation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "vtad/dataset.h"
#include "vtad/diffnet.h"
#include "vtad/metrics.h"

namespace vtad::oracle {

// Forward pass written element by element. `mask` holds the dropout scale
// per (row, hidden unit); pass an empty matrix for no dropout.
inline Matrix forward(const DiffNetParams& p, const Matrix& x, Mode mode, const Matrix& mask) {
  const int n = static_cast<int>(x.rows());
  const int in = p.input_dim(), h = p.hidden_size(), out = p.output_dim();
  std::vector<std::vector<double>> pre(n, std::vector<double>(h));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < h; ++j) {
      double acc = p.b1(j);
      for (int k = 0; k < in; ++k) acc += x(i, k) * p.w1(k, j);
      pre[i][j] = acc;
    }
  }
  Matrix y(n, out);
  std::vector<double> mean(h), var(h);
  for (int j = 0; j < h; ++j) {
    if (mode == Mode::kTrain) {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m += pre[i][j];
      m /= n;
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += (pre[i][j] - m) * (pre[i][j] - m);
      mean[j] = m;
      var[j] = v / n;
    } else {
      mean[j] = p.bn_running_mean(j);
      var[j] = p.bn_running_var(j);
    }
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> hidden(h);
    for (int j = 0; j < h; ++j) {
      const double xhat = (pre[i][j] - mean[j]) / std::sqrt(var[j] + kBatchNormEps);
      double a = p.bn_gamma(j) * xhat + p.bn_beta(j);
      if (a < 0.0) a = 0.0;
      if (mask.size() != 0) a *= mask(i, j);
      hidden[j] = a;
    }
    for (int o = 0; o < out; ++o) {
      double z = p.b2(o);
      for (int j = 0; j < h; ++j) z += hidden[j] * p.w2(j, o);
      y(i, o) = 1.0 / (1.0 + std::exp(-z));
    }
  }
  return y;
}

inline double masked_bce(std::span<const LabelVector> labels, const Matrix& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t d = 0; d < labels[i].values.size(); ++d) {
      const int l = labels[i].values[d];
      if (l == -1) continue;
      const double p =
          std::min(std::max(y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)), kBceEps),
                   1.0 - kBceEps);
      total += l == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
  }
  return total / static_cast<double>(labels.size());
}

// Largest relative difference between backprop gradients and central finite
// differences of the masked loss, over every trainable parameter.
// Relative error is |a - f| / max(|a|, |f|, floor).
inline double max_gradient_error(DiffNetParams params, const Matrix& x,
                                 std::span<const LabelVector> labels, double dropout,
                                 std::uint64_t dropout_seed, double step = 1e-5,
                                 double floor = 1e-6) {
  auto loss_at = [&](const DiffNetParams& p) {
    const auto fwd = vtad::forward(p, x, Mode::kTrain, dropout, dropout_seed);
    return masked_bce_loss(labels, fwd.predictions).loss;
  };
  const auto fwd = vtad::forward(params, x, Mode::kTrain, dropout, dropout_seed);
  const auto loss = masked_bce_loss(labels, fwd.predictions);
  const ParamGradients g = backward(params, fwd.cache, loss.grad);

  double worst = 0.0;
  auto check = [&](auto& tensor, const auto& grad) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      const double keep = tensor.data()[i];
      tensor.data()[i] = keep + step;
      const double up = loss_at(params);
      tensor.data()[i] = keep - step;
      const double down = loss_at(params);
      tensor.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grad.data()[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  };
  check(params.w1, g.w1);
  check(params.b1, g.b1);
  check(params.bn_gamma, g.bn_gamma);
  check(params.bn_beta, g.bn_beta);
  check(params.w2, g.w2);
  check(params.b2, g.b2);
  return worst;
}

// Exhaustive EER: every score (and +-inf) is tried as a threshold and the
// error rates are recounted from scratch for each one.
inline double eer(std::span<const ScoredOutcome> scores) {
  std::vector<double> thresholds{-std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()};
  long long targets = 0, nontargets = 0;
  for (const auto& s : scores) {
    thresholds.push_back(s.score);
    (s.truth ? targets : nontargets) += 1;
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<long long> miss, fa;
  for (double t : thresholds) {
    long long m = 0, f = 0;
    for (const auto& s : scores) {
      if (s.truth == 1 && s.score < t) ++m;
      if (s.truth == 0 && s.score >= t) ++f;
    }
    miss.push_back(m);
    fa.push_back(f);
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const long long lhs = miss[i] * nontargets, rhs = fa[i] * targets;
    if (lhs < rhs) continue;
    const double fnr = static_cast<double>(miss[i]) / targets;
    const double fpr = static_cast<double>(fa[i]) / nontargets;
    if (lhs == rhs) return fnr;
    const double fnr0 = static_cast<double>(miss[i - 1]) / targets;
    const double fpr0 = static_cast<double>(fa[i - 1]) / nontargets;
    // Intersect the two rate curves on the segment between points i-1 and i.
    const double alpha = (fpr0 - fnr0) / ((fpr0 - fnr0) - (fpr - fnr));
    return fnr0 + alpha * (fnr - fnr0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace vtad::oracle

#endif  // VTAD_TESTS_ORACLES_H_
