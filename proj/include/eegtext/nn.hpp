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
#include <memory>
#include <string>
#include <vector>

#include "eegtext/tensor.hpp"

namespace eegtext {

enum class Mode { kTrain, kEval };

/// A differentiable block. forward() caches whatever backward() needs; each
/// backward() accumulates into parameter .grad and returns the input
/// gradient. Parameters include non-trainable buffers (running statistics).
template <typename S>
class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor<S> forward(const Tensor<S>& x, Mode mode) = 0;
  virtual Tensor<S> backward(const Tensor<S>& grad_out) = 0;
  virtual void collect(std::vector<Param<S>*>& out) = 0;
  virtual std::string kind() const = 0;

  std::vector<Param<S>*> params() {
    std::vector<Param<S>*> out;
    collect(out);
    return out;
  }
};

template <typename S>
Index trainable_count(const std::vector<Param<S>*>& params) {
  Index n = 0;
  for (const auto* p : params)
    if (p->trainable) n += p->size();
  return n;
}

template <typename S>
void zero_grads(const std::vector<Param<S>*>& params) {
  for (auto* p : params) p->grad.setZero();
}

/// Uniform fan-in init, bound 1/sqrt(fan_in).
template <typename S>
void init_fan_in(Param<S>& p, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Index i = 0; i < p.size(); ++i)
    p.value[i] = static_cast<S>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

/// y = x W^T + b over the trailing dimension.
template <typename S>
class Linear : public Module<S> {
 public:
  Linear(Index in, Index out, Rng& rng, std::string name = "linear")
      : in_(in), out_(out), w_(name + ".weight", {out, in}), b_(name + ".bias", {out}) {
    init_fan_in(w_, in, rng);
  }

  Tensor<S> forward(const Tensor<S>& x, Mode) override {
    if (x.last() != in_) throw std::invalid_argument("Linear: trailing dim mismatch");
    x_ = x;
    auto shape = x.shape;
    shape.back() = out_;
    Tensor<S> y(shape);
    const Index n = x.numel() / in_;
    y.mat(n, out_).noalias() = x.mat(n, in_) * w_.mat(out_, in_).transpose();
    y.mat(n, out_).rowwise() += b_.value.matrix().transpose();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    const Index n = g.numel() / out_;
    const auto G = g.mat(n, out_);
    const auto X = x_.mat(n, in_);
    w_.grad_mat(out_, in_).noalias() += G.transpose() * X;
    b_.grad.matrix().noalias() += G.colwise().sum().transpose();
    Tensor<S> gx(x_.shape);
    gx.mat(n, in_).noalias() = G * w_.mat(out_, in_);
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    out.push_back(&w_);
    out.push_back(&b_);
  }
  std::string kind() const override { return "Linear"; }

  Param<S>& weight() { return w_; }
  Param<S>& bias() { return b_; }

 private:
  Index in_, out_;
  Param<S> w_, b_;
  Tensor<S> x_;
};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

template <typename S>
class ReLU : public Module<S> {
 public:
  Tensor<S> forward(const Tensor<S>& x, Mode) override {
    mask_ = (x.data > S(0));
    Tensor<S> y(x.shape);
    y.data = mask_.select(x.data, S(0));
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    Tensor<S> gx(g.shape);
    gx.data = mask_.select(g.data, S(0));
    return gx;
  }

  void collect(std::vector<Param<S>*>&) override {}
  std::string kind() const override { return "ReLU"; }

 private:
  Eigen::Array<bool, Eigen::Dynamic, 1> mask_;
};

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

/// Inverted dropout; identity in eval mode. Owns a deterministic stream so a
/// fixed master seed reproduces every mask.
template <typename S>
class Dropout : public Module<S> {
 public:
  Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("Dropout: p outside [0, 1)");
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) override {
    if (mode == Mode::kEval || p_ == 0.0) {
      active_ = false;
      return x;
    }
    active_ = true;
    const S scale = static_cast<S>(1.0 / (1.0 - p_));
    mask_.resize(x.numel());
    for (Index i = 0; i < x.numel(); ++i)
      mask_[i] = rng_.bernoulli(1.0 - p_) ? scale : S(0);
    Tensor<S> y(x.shape);
    y.data = x.data * mask_;
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    if (!active_) return g;
    Tensor<S> gx(g.shape);
    gx.data = g.data * mask_;
    return gx;
  }

  void collect(std::vector<Param<S>*>&) override {}
  std::string kind() const override { return "Dropout"; }

 private:
  double p_;
  Rng rng_;
  ArrayX<S> mask_;
  bool active_ = false;
};

// ---------------------------------------------------------------------------
// LayerNorm
// ---------------------------------------------------------------------------

/// Normalizes the trailing dimension with population variance, then applies
/// the learned affine.
template <typename S>
class LayerNorm : public Module<S> {
 public:
  LayerNorm(Index dim, Rng&, std::string name = "ln", double eps = 1e-5)
      : dim_(dim), eps_(static_cast<S>(eps)), gamma_(name + ".weight", {dim}),
        beta_(name + ".bias", {dim}) {
    gamma_.value.setOnes();
  }

  Tensor<S> forward(const Tensor<S>& x, Mode) override {
    if (x.last() != dim_) throw std::invalid_argument("LayerNorm: trailing dim mismatch");
    const Index n = x.numel() / dim_;
    xhat_ = Tensor<S>(x.shape);
    inv_sd_.resize(n);
    auto X = x.mat(n, dim_);
    auto Xh = xhat_.mat(n, dim_);
    Tensor<S> y(x.shape);
    auto Y = y.mat(n, dim_);
    for (Index i = 0; i < n; ++i) {
      const S mu = X.row(i).mean();
      const S var = (X.row(i).array() - mu).square().mean();
      inv_sd_[i] = S(1) / std::sqrt(var + eps_);
      Xh.row(i) = (X.row(i).array() - mu) * inv_sd_[i];
      Y.row(i) = Xh.row(i).array() * gamma_.value.transpose() + beta_.value.transpose();
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    const Index n = g.numel() / dim_;
    const auto G = g.mat(n, dim_);
    const auto Xh = xhat_.mat(n, dim_);
    Tensor<S> gx(xhat_.shape);
    auto Gx = gx.mat(n, dim_);
    for (Index i = 0; i < n; ++i) {
      const auto gi = G.row(i).array();
      const auto xh = Xh.row(i).array();
      gamma_.grad += (gi * xh).transpose();
      beta_.grad += gi.transpose();
      const auto gxh = gi * gamma_.value.transpose();
      const S m1 = gxh.mean();
      const S m2 = (gxh * xh).mean();
      Gx.row(i) = ((gxh - m1 - xh * m2) * inv_sd_[i]).matrix();
    }
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  std::string kind() const override { return "LayerNorm"; }

 private:
  Index dim_;
  S eps_;
  Param<S> gamma_, beta_;
  Tensor<S> xhat_;
  ArrayX<S> inv_sd_;
};

// ---------------------------------------------------------------------------
// BatchNorm1d
// ---------------------------------------------------------------------------

/// Per-channel normalization of [B, C, T] over batch and time. Training uses
/// biased batch statistics and keeps exponential running estimates (unbiased
/// variance, momentum weighting of the new estimate); eval uses the running
/// statistics.
template <typename S>
class BatchNorm1d : public Module<S> {
 public:
  BatchNorm1d(Index channels, Rng&, std::string name = "bn", double momentum = 0.1,
              double eps = 1e-5)
      : c_(channels), momentum_(static_cast<S>(momentum)), eps_(static_cast<S>(eps)),
        gamma_(name + ".weight", {channels}), beta_(name + ".bias", {channels}),
        rmean_(name + ".running_mean", {channels}, false),
        rvar_(name + ".running_var", {channels}, false) {
    gamma_.value.setOnes();
    rvar_.value.setOnes();
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) override {
    if (x.rank() != 3 || x.dim(1) != c_)
      throw std::invalid_argument("BatchNorm1d: expected [B, C, T] with C channels");
    const Index B = x.dim(0), T = x.dim(2);
    const Index n = B * T;
    train_ = (mode == Mode::kTrain);
    xhat_ = Tensor<S>(x.shape);
    inv_sd_.resize(c_);
    Tensor<S> y(x.shape);
    const auto X = x.mat(B * c_, T);
    auto Xh = xhat_.mat(B * c_, T);
    auto Y = y.mat(B * c_, T);
    for (Index c = 0; c < c_; ++c) {
      S mu, var;
      if (train_) {
        S sum = 0, sumsq = 0;
        for (Index b = 0; b < B; ++b) {
          sum += X.row(b * c_ + c).sum();
          sumsq += X.row(b * c_ + c).squaredNorm();
        }
        mu = sum / static_cast<S>(n);
        var = sumsq / static_cast<S>(n) - mu * mu;
        var = std::max(var, S(0));
        const S unbiased = n > 1 ? var * static_cast<S>(n) / static_cast<S>(n - 1) : var;
        rmean_.value[c] = (S(1) - momentum_) * rmean_.value[c] + momentum_ * mu;
        rvar_.value[c] = (S(1) - momentum_) * rvar_.value[c] + momentum_ * unbiased;
      } else {
        mu = rmean_.value[c];
        var = rvar_.value[c];
      }
      inv_sd_[c] = S(1) / std::sqrt(var + eps_);
      for (Index b = 0; b < B; ++b) {
        Xh.row(b * c_ + c) = (X.row(b * c_ + c).array() - mu) * inv_sd_[c];
        Y.row(b * c_ + c) = Xh.row(b * c_ + c).array() * gamma_.value[c] + beta_.value[c];
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    const Index B = g.dim(0), T = g.dim(2);
    const Index n = B * T;
    const auto G = g.mat(B * c_, T);
    const auto Xh = xhat_.mat(B * c_, T);
    Tensor<S> gx(g.shape);
    auto Gx = gx.mat(B * c_, T);
    for (Index c = 0; c < c_; ++c) {
      S gsum = 0, gdot = 0;
      for (Index b = 0; b < B; ++b) {
        const auto gi = G.row(b * c_ + c).array();
        gsum += gi.sum();
        gdot += (gi * Xh.row(b * c_ + c).array()).sum();
      }
      gamma_.grad[c] += gdot;
      beta_.grad[c] += gsum;
      const S scale = gamma_.value[c] * inv_sd_[c];
      if (train_) {
        const S m1 = gsum / static_cast<S>(n);
        const S m2 = gdot / static_cast<S>(n);
        for (Index b = 0; b < B; ++b)
          Gx.row(b * c_ + c) =
              ((G.row(b * c_ + c).array() - m1 - Xh.row(b * c_ + c).array() * m2) * scale)
                  .matrix();
      } else {
        for (Index b = 0; b < B; ++b)
          Gx.row(b * c_ + c) = (G.row(b * c_ + c).array() * scale).matrix();
      }
    }
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&rmean_);
    out.push_back(&rvar_);
  }
  std::string kind() const override { return "BatchNorm1d"; }

 private:
  Index c_;
  S momentum_, eps_;
  Param<S> gamma_, beta_, rmean_, rvar_;
  Tensor<S> xhat_;
  ArrayX<S> inv_sd_;
  bool train_ = true;
};

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

/// 1-d convolution over [B, C_in, T] via im2col + GEMM.
template <typename S>
class Conv1d : public Module<S> {
 public:
  Conv1d(Index in, Index out, Index kernel, Index stride, Index padding, Rng& rng,
         std::string name = "conv")
      : in_(in), out_(out), k_(kernel), stride_(stride), pad_(padding),
        w_(name + ".weight", {out, in, kernel}), b_(name + ".bias", {out}) {
    if (kernel < 1 || stride < 1 || padding < 0)
      throw std::invalid_argument("Conv1d: bad kernel/stride/padding");
    init_fan_in(w_, in * kernel, rng);
  }

  Index out_len(Index t) const {
    const Index span = t + 2 * pad_ - k_;
    if (span < 0) throw std::invalid_argument("Conv1d: input shorter than kernel");
    return span / stride_ + 1;
  }

  Tensor<S> forward(const Tensor<S>& x, Mode) override {
    if (x.rank() != 3 || x.dim(1) != in_)
      throw std::invalid_argument("Conv1d: expected [B, C_in, T]");
    const Index B = x.dim(0), T = x.dim(2);
    const Index To = out_len(T);
    t_in_ = T;
    cols_.assign(static_cast<std::size_t>(B), MatrixRM<S>());
    Tensor<S> y({B, out_, To});
    const auto W = w_.mat(out_, in_ * k_);
    for (Index b = 0; b < B; ++b) {
      const auto Xb = x.mat(B * in_, T).middleRows(b * in_, in_);
      auto& col = cols_[static_cast<std::size_t>(b)];
      col.setZero(in_ * k_, To);
      for (Index t = 0; t < To; ++t) {
        const Index base = t * stride_ - pad_;
        for (Index kk = 0; kk < k_; ++kk) {
          const Index src = base + kk;
          if (src < 0 || src >= T) continue;
          for (Index ci = 0; ci < in_; ++ci) col(ci * k_ + kk, t) = Xb(ci, src);
        }
      }
      auto Yb = y.mat(B * out_, To).middleRows(b * out_, out_);
      Yb.noalias() = W * col;
      Yb.colwise() += b_.value.matrix();
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    const Index B = g.dim(0), To = g.dim(2);
    Tensor<S> gx({B, in_, t_in_});
    const auto W = w_.mat(out_, in_ * k_);
    auto gW = w_.grad_mat(out_, in_ * k_);
    for (Index b = 0; b < B; ++b) {
      const auto Gb = g.mat(B * out_, To).middleRows(b * out_, out_);
      const auto& col = cols_[static_cast<std::size_t>(b)];
      gW.noalias() += Gb * col.transpose();
      b_.grad.matrix().noalias() += Gb.rowwise().sum();
      MatrixRM<S> gcol = W.transpose() * Gb;  // [in*k, To]
      auto Gx = gx.mat(B * in_, t_in_).middleRows(b * in_, in_);
      for (Index t = 0; t < To; ++t) {
        const Index base = t * stride_ - pad_;
        for (Index kk = 0; kk < k_; ++kk) {
          const Index src = base + kk;
          if (src < 0 || src >= t_in_) continue;
          for (Index ci = 0; ci < in_; ++ci) Gx(ci, src) += gcol(ci * k_ + kk, t);
        }
      }
    }
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    out.push_back(&w_);
    out.push_back(&b_);
  }
  std::string kind() const override { return "Conv1d"; }

 private:
  Index in_, out_, k_, stride_, pad_;
  Param<S> w_, b_;
  std::vector<MatrixRM<S>> cols_;
  Index t_in_ = 0;
};

// ---------------------------------------------------------------------------
// Multi-head self-attention with learned relative position bias
// ---------------------------------------------------------------------------

/// Scaled dot-product attention over [B, S, d] where each key also carries a
/// learned relative-position embedding: the score for query i and key j adds
/// q_i . p[clip(j - i, -radius, radius)]. One [2*radius + 1, d] table is
/// shared across heads (each head reads its own column slice).
template <typename S>
class MhsaRelative : public Module<S> {
 public:
  MhsaRelative(Index dim, Index heads, Index radius, Rng& rng, std::string name = "mhsa")
      : d_(dim), h_(heads), radius_(radius),
        wq_(name + ".q.weight", {dim, dim}), bq_(name + ".q.bias", {dim}),
        wk_(name + ".k.weight", {dim, dim}), bk_(name + ".k.bias", {dim}),
        wv_(name + ".v.weight", {dim, dim}), bv_(name + ".v.bias", {dim}),
        wo_(name + ".out.weight", {dim, dim}), bo_(name + ".out.bias", {dim}),
        rel_(name + ".rel.weight", {2 * radius + 1, dim}) {
    if (dim % heads != 0) throw std::invalid_argument("MhsaRelative: dim % heads != 0");
    if (radius < 0) throw std::invalid_argument("MhsaRelative: negative radius");
    init_fan_in(wq_, dim, rng);
    init_fan_in(wk_, dim, rng);
    init_fan_in(wv_, dim, rng);
    init_fan_in(wo_, dim, rng);
    init_fan_in(rel_, dim, rng);
  }

  Tensor<S> forward(const Tensor<S>& x, Mode) override {
    if (x.rank() != 3 || x.dim(2) != d_)
      throw std::invalid_argument("MhsaRelative: expected [B, S, d]");
    const Index B = x.dim(0), T = x.dim(1);
    const Index dh = d_ / h_;
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    x_ = x;
    const Index n = B * T;
    q_.resize(n, d_);
    k_.resize(n, d_);
    v_.resize(n, d_);
    o_.resize(n, d_);
    const auto X = x.mat(n, d_);
    q_.noalias() = X * wq_.mat(d_, d_).transpose();
    q_.rowwise() += bq_.value.matrix().transpose();
    k_.noalias() = X * wk_.mat(d_, d_).transpose();
    k_.rowwise() += bk_.value.matrix().transpose();
    v_.noalias() = X * wv_.mat(d_, d_).transpose();
    v_.rowwise() += bv_.value.matrix().transpose();

    attn_.assign(static_cast<std::size_t>(B * h_), MatrixRM<S>());
    const auto P = rel_.mat(2 * radius_ + 1, d_);
    for (Index b = 0; b < B; ++b) {
      for (Index head = 0; head < h_; ++head) {
        const auto Qh = q_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Kh = k_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Vh = v_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Ph = P.middleCols(head * dh, dh);
        MatrixRM<S> qp = Qh * Ph.transpose();  // [T, 2*radius+1]
        MatrixRM<S> scores = Qh * Kh.transpose();
        for (Index i = 0; i < T; ++i)
          for (Index j = 0; j < T; ++j) scores(i, j) += qp(i, rel_index(i, j));
        scores *= scale;
        auto& A = attn_[static_cast<std::size_t>(b * h_ + head)];
        A.resize(T, T);
        for (Index i = 0; i < T; ++i) {
          const S m = scores.row(i).maxCoeff();
          A.row(i) = (scores.row(i).array() - m).exp();
          A.row(i) /= A.row(i).sum();
        }
        o_.middleRows(b * T, T).middleCols(head * dh, dh).noalias() = A * Vh;
      }
    }
    Tensor<S> y(x.shape);
    y.mat(n, d_).noalias() = o_ * wo_.mat(d_, d_).transpose();
    y.mat(n, d_).rowwise() += bo_.value.matrix().transpose();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    const Index B = x_.dim(0), T = x_.dim(1);
    const Index dh = d_ / h_;
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    const Index n = B * T;
    const auto G = g.mat(n, d_);
    wo_.grad_mat(d_, d_).noalias() += G.transpose() * o_;
    bo_.grad.matrix().noalias() += G.colwise().sum().transpose();
    MatrixRM<S> gO = G * wo_.mat(d_, d_);

    MatrixRM<S> gQ = MatrixRM<S>::Zero(n, d_);
    MatrixRM<S> gK = MatrixRM<S>::Zero(n, d_);
    MatrixRM<S> gV = MatrixRM<S>::Zero(n, d_);
    const auto P = rel_.mat(2 * radius_ + 1, d_);
    auto gP = rel_.grad_mat(2 * radius_ + 1, d_);
    for (Index b = 0; b < B; ++b) {
      for (Index head = 0; head < h_; ++head) {
        const auto Qh = q_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Kh = k_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Vh = v_.middleRows(b * T, T).middleCols(head * dh, dh);
        const auto Ph = P.middleCols(head * dh, dh);
        const auto& A = attn_[static_cast<std::size_t>(b * h_ + head)];
        const auto gOh = gO.middleRows(b * T, T).middleCols(head * dh, dh);

        MatrixRM<S> gA = gOh * Vh.transpose();
        gV.middleRows(b * T, T).middleCols(head * dh, dh).noalias() += A.transpose() * gOh;

        MatrixRM<S> gScores(T, T);
        for (Index i = 0; i < T; ++i) {
          const S dot = (gA.row(i).array() * A.row(i).array()).sum();
          gScores.row(i) = (A.row(i).array() * (gA.row(i).array() - dot)).matrix();
        }
        gScores *= scale;

        gQ.middleRows(b * T, T).middleCols(head * dh, dh).noalias() += gScores * Kh;
        gK.middleRows(b * T, T).middleCols(head * dh, dh).noalias() +=
            gScores.transpose() * Qh;

        MatrixRM<S> gQP = MatrixRM<S>::Zero(T, 2 * radius_ + 1);
        for (Index i = 0; i < T; ++i)
          for (Index j = 0; j < T; ++j) gQP(i, rel_index(i, j)) += gScores(i, j);
        gQ.middleRows(b * T, T).middleCols(head * dh, dh).noalias() += gQP * Ph;
        gP.middleCols(head * dh, dh).noalias() += gQP.transpose() * Qh;
      }
    }

    const auto X = x_.mat(n, d_);
    wq_.grad_mat(d_, d_).noalias() += gQ.transpose() * X;
    wk_.grad_mat(d_, d_).noalias() += gK.transpose() * X;
    wv_.grad_mat(d_, d_).noalias() += gV.transpose() * X;
    bq_.grad.matrix().noalias() += gQ.colwise().sum().transpose();
    bk_.grad.matrix().noalias() += gK.colwise().sum().transpose();
    bv_.grad.matrix().noalias() += gV.colwise().sum().transpose();
    Tensor<S> gx(x_.shape);
    gx.mat(n, d_).noalias() = gQ * wq_.mat(d_, d_);
    gx.mat(n, d_).noalias() += gK * wk_.mat(d_, d_);
    gx.mat(n, d_).noalias() += gV * wv_.mat(d_, d_);
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    for (auto* p : {&wq_, &bq_, &wk_, &bk_, &wv_, &bv_, &wo_, &bo_, &rel_}) out.push_back(p);
  }
  std::string kind() const override { return "MhsaRelative"; }

  /// Attention of the most recent forward, for one (batch, head).
  const MatrixRM<S>& last_attention(Index b, Index head) const {
    return attn_.at(static_cast<std::size_t>(b * h_ + head));
  }

 private:
  Index rel_index(Index i, Index j) const {
    const Index r = std::clamp(j - i, -radius_, radius_);
    return r + radius_;
  }

  Index d_, h_, radius_;
  Param<S> wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_, rel_;
  Tensor<S> x_;
  MatrixRM<S> q_, k_, v_, o_;
  std::vector<MatrixRM<S>> attn_;
};

// ---------------------------------------------------------------------------
// Transformer encoder layer (post-norm)
// ---------------------------------------------------------------------------

template <typename S>
class EncoderLayer : public Module<S> {
 public:
  EncoderLayer(Index dim, Index heads, Index ffn_dim, Index radius, double dropout, Rng& rng,
               std::uint64_t dropout_seed, std::string name = "enc")
      : mhsa_(dim, heads, radius, rng, name + ".mhsa"),
        drop1_(dropout, dropout_seed * 2 + 1), ln1_(dim, rng, name + ".ln1"),
        fc1_(dim, ffn_dim, rng, name + ".ffn.fc1"), fc2_(ffn_dim, dim, rng, name + ".ffn.fc2"),
        drop2_(dropout, dropout_seed * 2 + 2), ln2_(dim, rng, name + ".ln2") {}

  Tensor<S> forward(const Tensor<S>& x, Mode mode) override {
    Tensor<S> a = drop1_.forward(mhsa_.forward(x, mode), mode);
    a.data += x.data;
    Tensor<S> h1 = ln1_.forward(a, mode);
    Tensor<S> f = drop2_.forward(
        fc2_.forward(relu_.forward(fc1_.forward(h1, mode), mode), mode), mode);
    f.data += h1.data;
    return ln2_.forward(f, mode);
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    Tensor<S> gs2 = ln2_.backward(g);
    Tensor<S> gh1 = fc1_.backward(relu_.backward(fc2_.backward(drop2_.backward(gs2))));
    gh1.data += gs2.data;
    Tensor<S> gs1 = ln1_.backward(gh1);
    Tensor<S> gx = mhsa_.backward(drop1_.backward(gs1));
    gx.data += gs1.data;
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    mhsa_.collect(out);
    ln1_.collect(out);
    fc1_.collect(out);
    fc2_.collect(out);
    ln2_.collect(out);
  }
  std::string kind() const override { return "EncoderLayer"; }

  MhsaRelative<S>& attention() { return mhsa_; }

 private:
  MhsaRelative<S> mhsa_;
  Dropout<S> drop1_;
  LayerNorm<S> ln1_;
  Linear<S> fc1_;
  ReLU<S> relu_;
  Linear<S> fc2_;
  Dropout<S> drop2_;
  LayerNorm<S> ln2_;
};

// ---------------------------------------------------------------------------
// Residual downsampling conv block
// ---------------------------------------------------------------------------

/// Two 3-tap convolutions (the first strided) with batch norm, plus a strided
/// 1-tap projection shortcut; halves the time dimension.
template <typename S>
class ResBlock : public Module<S> {
 public:
  ResBlock(Index in, Index out, Rng& rng, std::string name = "res")
      : conv1_(in, out, 3, 2, 1, rng, name + ".conv1"), bn1_(out, rng, name + ".bn1"),
        conv2_(out, out, 3, 1, 1, rng, name + ".conv2"), bn2_(out, rng, name + ".bn2"),
        proj_(in, out, 1, 2, 0, rng, name + ".proj"), bnp_(out, rng, name + ".bnp") {}

  Tensor<S> forward(const Tensor<S>& x, Mode mode) override {
    Tensor<S> main = bn2_.forward(
        conv2_.forward(relu1_.forward(bn1_.forward(conv1_.forward(x, mode), mode), mode), mode),
        mode);
    Tensor<S> side = bnp_.forward(proj_.forward(x, mode), mode);
    main.data += side.data;
    return relu2_.forward(main, mode);
  }

  Tensor<S> backward(const Tensor<S>& g) override {
    Tensor<S> gsum = relu2_.backward(g);
    Tensor<S> gx = proj_.backward(bnp_.backward(gsum));
    gx.data +=
        conv1_.backward(bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(gsum)))))
            .data;
    return gx;
  }

  void collect(std::vector<Param<S>*>& out) override {
    conv1_.collect(out);
    bn1_.collect(out);
    conv2_.collect(out);
    bn2_.collect(out);
    proj_.collect(out);
    bnp_.collect(out);
  }
  std::string kind() const override { return "ResBlock"; }

  Index out_len(Index t) const { return conv2_.out_len(conv1_.out_len(t)); }

 private:
  Conv1d<S> conv1_;
  BatchNorm1d<S> bn1_;
  ReLU<S> relu1_;
  Conv1d<S> conv2_;
  BatchNorm1d<S> bn2_;
  Conv1d<S> proj_;
  BatchNorm1d<S> bnp_;
  ReLU<S> relu2_;
};

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename S>
class Adam {
 public:
  explicit Adam(std::vector<Param<S>*> params, double lr = 1e-4, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto* p : params)
      if (p->trainable) params_.push_back(p);
    for (auto* p : params_) {
      m_.push_back(ArrayX<S>::Zero(p->size()));
      v_.push_back(ArrayX<S>::Zero(p->size()));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto* p = params_[i];
      m_[i] = static_cast<S>(beta1_) * m_[i] + static_cast<S>(1.0 - beta1_) * p->grad;
      v_[i] = static_cast<S>(beta2_) * v_[i] + static_cast<S>(1.0 - beta2_) * p->grad.square();
      p->value -= static_cast<S>(lr_) * (m_[i] / static_cast<S>(c1)) /
                  ((v_[i] / static_cast<S>(c2)).sqrt() + static_cast<S>(eps_));
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->grad.setZero();
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  std::vector<Param<S>*> params_;
  std::vector<ArrayX<S>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace eegtext
