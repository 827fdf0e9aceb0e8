// Copyright 2026 The eegtext Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "eegtext/tensor.hpp"

namespace eegtext {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double log_sum_exp(double a, double b, double c) {
  return log_sum_exp(log_sum_exp(a, b), c);
}

/// Loss value plus the gradient with respect to the logits that produced it.
template <typename S>
struct LossResult {
  double value = 0.0;
  Tensor<S> grad;
};

// ---------------------------------------------------------------------------
// Cross entropy
// ---------------------------------------------------------------------------

/// Softmax cross entropy over [B, C] logits. With class weights the batch
/// reduction divides by the sum of the selected weights (so uniform weights
/// of any scale reproduce the unweighted mean).
template <typename S>
LossResult<S> cross_entropy(const Tensor<S>& logits, const std::vector<int>& targets,
                            const std::vector<double>& class_weights = {}) {
  if (logits.rank() != 2) throw std::invalid_argument("cross_entropy: expected [B, C] logits");
  const Index B = logits.dim(0), C = logits.dim(1);
  if (static_cast<Index>(targets.size()) != B)
    throw std::invalid_argument("cross_entropy: batch size mismatch");
  if (!class_weights.empty() && static_cast<Index>(class_weights.size()) != C)
    throw std::invalid_argument("cross_entropy: class_weights size mismatch");

  LossResult<S> out;
  out.grad = Tensor<S>(logits.shape);
  const auto X = logits.mat(B, C);
  auto G = out.grad.mat(B, C);
  double loss = 0.0, weight_sum = 0.0;
  Eigen::ArrayXd p(C);
  std::vector<double> wb(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    const int y = targets[static_cast<std::size_t>(b)];
    if (y < 0 || y >= C) throw std::invalid_argument("cross_entropy: target out of range");
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(y)];
    wb[static_cast<std::size_t>(b)] = w;
    weight_sum += w;
    p = X.row(b).template cast<double>().array();
    const double m = p.maxCoeff();
    p = (p - m).exp();
    const double z = p.sum();
    p /= z;
    loss -= w * std::log(p[y]);
  }
  if (weight_sum <= 0.0) throw std::invalid_argument("cross_entropy: non-positive weight sum");
  out.value = loss / weight_sum;
  for (Index b = 0; b < B; ++b) {
    const int y = targets[static_cast<std::size_t>(b)];
    p = X.row(b).template cast<double>().array();
    const double m = p.maxCoeff();
    p = (p - m).exp();
    p /= p.sum();
    p *= wb[static_cast<std::size_t>(b)] / weight_sum;
    p[y] -= wb[static_cast<std::size_t>(b)] / weight_sum;
    G.row(b) = p.cast<S>().matrix().transpose();
  }
  return out;
}

/// Weights proportional to 1 / count, rescaled to mean 1 across classes.
inline std::vector<double> inverse_frequency_weights(const std::vector<std::int64_t>& counts) {
  if (counts.empty()) throw std::invalid_argument("inverse_frequency_weights: empty counts");
  std::vector<double> w(counts.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0)
      throw std::invalid_argument("inverse_frequency_weights: non-positive count");
    w[i] = 1.0 / static_cast<double>(counts[i]);
    sum += w[i];
  }
  const double scale = static_cast<double>(counts.size()) / sum;
  for (auto& x : w) x *= scale;
  return w;
}

// ---------------------------------------------------------------------------
// CTC loss
// ---------------------------------------------------------------------------

/// Number of frames any CTC alignment of `target` needs: its length plus one
/// separating blank per adjacent repeat.
inline Index ctc_min_frames(const std::vector<int>& target) {
  Index n = static_cast<Index>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

/// Negative log-likelihood of `target` under the CTC alignment model, with
/// the gradient with respect to the [T, A] logits. Log-space forward plus
/// backward recursions; the symbol posterior at every frame sums to one.
template <typename S>
LossResult<S> ctc_loss(const Tensor<S>& logits, const std::vector<int>& target, int blank = 0) {
  if (logits.rank() != 2) throw std::invalid_argument("ctc_loss: expected [T, A] logits");
  const Index T = logits.dim(0), A = logits.dim(1);
  if (T < 1 || A < 2) throw std::invalid_argument("ctc_loss: need T >= 1 and A >= 2");
  for (int y : target) {
    if (y <= 0 || y >= A)
      throw std::invalid_argument(
          y == blank ? "ctc_loss: target contains the blank symbol"
                     : "ctc_loss: target symbol out of range");
  }
  if (blank != 0) throw std::invalid_argument("ctc_loss: blank must be index 0");
  const Index need = ctc_min_frames(target);
  if (need > T) {
    std::ostringstream msg;
    msg << "ctc_loss: target needs " << need << " frames but only " << T << " are available";
    throw std::invalid_argument(msg.str());
  }

  // Log-softmax per frame, in double.
  Eigen::ArrayXXd lp(T, A);
  const auto X = logits.mat(T, A);
  for (Index t = 0; t < T; ++t) {
    Eigen::ArrayXd row = X.row(t).template cast<double>().array();
    const double m = row.maxCoeff();
    const double lse = m + std::log((row - m).exp().sum());
    lp.row(t) = row - lse;
  }

  // Blank-interleaved extended target.
  const Index L = 2 * static_cast<Index>(target.size()) + 1;
  std::vector<int> z(static_cast<std::size_t>(L), blank);
  for (std::size_t i = 0; i < target.size(); ++i) z[2 * i + 1] = target[i];

  const auto allow_skip = [&](Index s) {
    return s >= 2 && z[static_cast<std::size_t>(s)] != blank &&
           z[static_cast<std::size_t>(s)] != z[static_cast<std::size_t>(s - 2)];
  };

  Eigen::ArrayXXd alpha = Eigen::ArrayXXd::Constant(T, L, kLogZero);
  alpha(0, 0) = lp(0, blank);
  if (L > 1) alpha(0, 1) = lp(0, z[1]);
  for (Index t = 1; t < T; ++t) {
    for (Index s = 0; s < L; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_sum_exp(acc, alpha(t - 1, s - 1));
      if (allow_skip(s)) acc = log_sum_exp(acc, alpha(t - 1, s - 2));
      if (acc != kLogZero) alpha(t, s) = acc + lp(t, z[static_cast<std::size_t>(s)]);
    }
  }
  const double log_p = L > 1 ? log_sum_exp(alpha(T - 1, L - 1), alpha(T - 1, L - 2))
                             : alpha(T - 1, L - 1);
  if (log_p == kLogZero)
    throw std::runtime_error("ctc_loss: zero-probability target");

  Eigen::ArrayXXd beta = Eigen::ArrayXXd::Constant(T, L, kLogZero);
  beta(T - 1, L - 1) = lp(T - 1, z[static_cast<std::size_t>(L - 1)]);
  if (L > 1) beta(T - 1, L - 2) = lp(T - 1, z[static_cast<std::size_t>(L - 2)]);
  for (Index t = T - 2; t >= 0; --t) {
    for (Index s = 0; s < L; ++s) {
      double acc = beta(t + 1, s);
      if (s + 1 < L) acc = log_sum_exp(acc, beta(t + 1, s + 1));
      if (s + 2 < L && allow_skip(s + 2)) acc = log_sum_exp(acc, beta(t + 1, s + 2));
      if (acc != kLogZero) beta(t, s) = acc + lp(t, z[static_cast<std::size_t>(s)]);
    }
  }

  LossResult<S> out;
  out.value = -log_p;
  out.grad = Tensor<S>(logits.shape);
  auto G = out.grad.mat(T, A);
  for (Index t = 0; t < T; ++t) {
    // Symbol posterior q(t, a) = sum over states s with z_s = a of
    // exp(alpha + beta - lp(t, z_s) - log_p).
    Eigen::ArrayXd q_log = Eigen::ArrayXd::Constant(A, kLogZero);
    for (Index s = 0; s < L; ++s) {
      if (alpha(t, s) == kLogZero || beta(t, s) == kLogZero) continue;
      const int a = z[static_cast<std::size_t>(s)];
      q_log[a] = log_sum_exp(q_log[a],
                             alpha(t, s) + beta(t, s) - lp(t, a));
    }
    for (Index a = 0; a < A; ++a) {
      const double q = q_log[a] == kLogZero ? 0.0 : std::exp(q_log[a] - log_p);
      G(t, a) = static_cast<S>(std::exp(lp(t, a)) - q);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// VAE loss
// ---------------------------------------------------------------------------

/// ELBO pieces for a Gaussian-latent autoencoder: squared-error
/// reconstruction (summed over elements, averaged over the batch) plus the
/// closed-form KL to the standard normal, weighted by beta.
template <typename S>
struct VaeLossResult {
  double total = 0.0, recon = 0.0, kl = 0.0;
  Tensor<S> grad_recon;   // d total / d x_hat
  Tensor<S> grad_mu;      // d total / d mu
  Tensor<S> grad_logvar;  // d total / d logvar
};

template <typename S>
VaeLossResult<S> vae_loss(const Tensor<S>& x_hat, const Tensor<S>& x, const Tensor<S>& mu,
                          const Tensor<S>& logvar, double beta = 1.0) {
  if (!x_hat.same_shape(x)) throw std::invalid_argument("vae_loss: x_hat/x shape mismatch");
  if (!mu.same_shape(logvar)) throw std::invalid_argument("vae_loss: mu/logvar shape mismatch");
  if (x_hat.rank() < 1 || mu.rank() < 1 || x_hat.dim(0) != mu.dim(0))
    throw std::invalid_argument("vae_loss: batch dims disagree");
  const double B = static_cast<double>(x.dim(0));

  VaeLossResult<S> out;
  const Eigen::ArrayXd diff =
      x_hat.data.template cast<double>() - x.data.template cast<double>();
  out.recon = diff.square().sum() / B;

  const Eigen::ArrayXd m = mu.data.template cast<double>();
  const Eigen::ArrayXd lv = logvar.data.template cast<double>();
  out.kl = 0.5 * (lv.exp() + m.square() - 1.0 - lv).sum() / B;
  out.total = out.recon + beta * out.kl;

  out.grad_recon = Tensor<S>(x_hat.shape);
  out.grad_recon.data = (2.0 / B * diff).cast<S>();
  out.grad_mu = Tensor<S>(mu.shape);
  out.grad_mu.data = (beta / B * m).cast<S>();
  out.grad_logvar = Tensor<S>(logvar.shape);
  out.grad_logvar.data = (beta * 0.5 / B * (lv.exp() - 1.0)).cast<S>();
  return out;
}

// ---------------------------------------------------------------------------
// Word error rate
// ---------------------------------------------------------------------------

struct WerCounts {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t ref_words = 0;

  std::int64_t errors() const { return substitutions + insertions + deletions; }

  double value() const {
    if (ref_words == 0) {
      if (errors() == 0) return 0.0;
      throw std::invalid_argument("WerCounts: empty reference with nonzero errors");
    }
    return static_cast<double>(errors()) / static_cast<double>(ref_words);
  }

  WerCounts& operator+=(const WerCounts& o) {
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    ref_words += o.ref_words;
    return *this;
  }
};

/// Minimum-edit alignment of hypothesis against reference. Ties in the
/// backtrace prefer substitution over deletion over insertion.
inline WerCounts wer_counts(const std::vector<std::string>& ref,
                            const std::vector<std::string>& hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<std::int64_t>> d(R + 1, std::vector<std::int64_t>(H + 1, 0));
  for (std::size_t i = 0; i <= R; ++i) d[i][0] = static_cast<std::int64_t>(i);
  for (std::size_t j = 0; j <= H; ++j) d[0][j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= R; ++i) {
    for (std::size_t j = 1; j <= H; ++j) {
      const std::int64_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::int64_t del = d[i - 1][j] + 1;
      const std::int64_t ins = d[i][j - 1] + 1;
      d[i][j] = std::min({sub, del, ins});
    }
  }
  WerCounts out;
  out.ref_words = static_cast<std::int64_t>(R);
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++out.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

inline double wer(const std::string& ref_text, const std::string& hyp_text) {
  return wer_counts(split_words(ref_text), split_words(hyp_text)).value();
}

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

/// Class indices sorted by descending score; equal scores break toward the
/// lower index.
template <typename S>
std::vector<int> topk_indices(const Tensor<S>& logits, Index row, Index k) {
  const Index C = logits.last();
  std::vector<int> idx(static_cast<std::size_t>(C));
  for (Index c = 0; c < C; ++c) idx[static_cast<std::size_t>(c)] = static_cast<int>(c);
  const auto X = logits.mat(logits.numel() / C, C);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return X(row, a) > X(row, b); });
  idx.resize(static_cast<std::size_t>(std::min(k, C)));
  return idx;
}

template <typename S>
double topk_accuracy(const Tensor<S>& logits, const std::vector<int>& targets, Index k) {
  const Index B = logits.dim(0);
  if (static_cast<Index>(targets.size()) != B)
    throw std::invalid_argument("topk_accuracy: batch size mismatch");
  Index hits = 0;
  for (Index b = 0; b < B; ++b) {
    const auto top = topk_indices(logits, b, k);
    for (int c : top)
      if (c == targets[static_cast<std::size_t>(b)]) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(B);
}

template <typename S>
double accuracy(const Tensor<S>& logits, const std::vector<int>& targets) {
  return topk_accuracy(logits, targets, 1);
}

}  // namespace eegtext
