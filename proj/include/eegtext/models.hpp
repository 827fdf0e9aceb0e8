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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "eegtext/nn.hpp"
#include "eegtext/objectives.hpp"

namespace eegtext {

/// Shared trunk geometry: two downsampling ResBlocks (time / 4), a linear
/// projection into the model dimension, then a stack of relative-position
/// transformer encoder layers.
struct EncoderStackConfig {
  Index channels = 60;   // input rows
  Index window = 520;    // input time samples; must be a multiple of 4
  Index d_model = 768;
  Index layers = 6;
  Index heads = 8;
  Index ffn = 3072;
  Index radius = 97;     // relative-position context half-width
  double dropout = 0.1;
};

struct WordClassifierConfig : EncoderStackConfig {
  Index classes = 601;

  /// Full-scale configuration (raw track, word windows).
  static WordClassifierConfig full_scale() { return WordClassifierConfig{}; }

  /// Small configuration that trains on a laptop-size synthetic corpus.
  static WordClassifierConfig desk(Index channels, Index window, Index classes) {
    WordClassifierConfig c;
    c.channels = channels;
    c.window = window;
    c.classes = classes;
    c.d_model = 64;
    c.layers = 2;
    c.heads = 8;
    c.ffn = 256;
    c.radius = 16;
    return c;
  }
};

struct SeqToSeqConfig : EncoderStackConfig {
  Index alphabet = 38;

  static SeqToSeqConfig full_scale() {
    SeqToSeqConfig c;
    c.window = 5000;
    return c;
  }

  static SeqToSeqConfig desk(Index channels, Index window, Index alphabet) {
    SeqToSeqConfig c;
    c.channels = channels;
    c.window = window;
    c.alphabet = alphabet;
    c.d_model = 64;
    c.layers = 2;
    c.heads = 8;
    c.ffn = 256;
    c.radius = 16;
    return c;
  }
};

namespace detail {

inline void check_stack_config(const EncoderStackConfig& cfg) {
  if (cfg.channels < 1 || cfg.window < 4 || cfg.window % 4 != 0)
    throw std::invalid_argument("model config: window must be a positive multiple of 4");
  if (cfg.d_model < 1 || cfg.layers < 1 || cfg.heads < 1 || cfg.ffn < 1 || cfg.radius < 0)
    throw std::invalid_argument("model config: non-positive dimension");
  if (cfg.d_model % cfg.heads != 0)
    throw std::invalid_argument("model config: d_model % heads != 0");
}

}  // namespace detail

/// EEG window -> word class logits. Two ResBlocks quarter the time axis, a
/// linear projection feeds the encoder stack, a learned class token is
/// prepended, and the classifier head reads the token position.
template <typename S>
class WordClassifier {
 public:
  WordClassifier(const WordClassifierConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed),
        rb1_(cfg.channels, cfg.d_model, rng_, "res1"),
        rb2_(cfg.d_model, cfg.d_model, rng_, "res2"),
        proj_(cfg.d_model, cfg.d_model, rng_, "proj"),
        token_("class_token", {cfg.d_model}),
        head_(cfg.d_model, cfg.classes, rng_, "head") {
    detail::check_stack_config(cfg);
    if (cfg.classes < 2) throw std::invalid_argument("WordClassifier: classes < 2");
    init_fan_in(token_, cfg.d_model, rng_);
    for (Index i = 0; i < cfg.layers; ++i)
      layers_.push_back(std::make_unique<EncoderLayer<S>>(
          cfg.d_model, cfg.heads, cfg.ffn, cfg.radius, cfg.dropout, rng_,
          seed * 131 + static_cast<std::uint64_t>(i),
          "enc" + std::to_string(i)));
  }

  /// Time steps entering the encoder (conv output plus the class token).
  Index seq_len() const { return cfg_.window / 4 + 1; }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    if (x.rank() != 3 || x.dim(1) != cfg_.channels || x.dim(2) != cfg_.window)
      throw std::invalid_argument("WordClassifier: expected [B, channels, window]");
    const Index B = x.dim(0), d = cfg_.d_model;
    Tensor<S> h = proj_.forward(rb2_.forward(rb1_.forward(x, mode), mode).transpose12(), mode);
    const Index T = h.dim(1);
    batch_ = B;
    trunk_len_ = T;
    Tensor<S> z({B, T + 1, d});
    for (Index b = 0; b < B; ++b) {
      z.mat(B * (T + 1), d).row(b * (T + 1)) = token_.value.matrix().transpose();
      z.mat(B * (T + 1), d).middleRows(b * (T + 1) + 1, T) =
          h.mat(B * T, d).middleRows(b * T, T);
    }
    for (auto& layer : layers_) z = layer->forward(z, mode);
    Tensor<S> cls({B, d});
    for (Index b = 0; b < B; ++b)
      cls.mat(B, d).row(b) = z.mat(B * (T + 1), d).row(b * (T + 1));
    return head_.forward(cls, mode);
  }

  Tensor<S> backward(const Tensor<S>& grad_logits) {
    const Index B = batch_, T = trunk_len_, d = cfg_.d_model;
    Tensor<S> gcls = head_.backward(grad_logits);
    Tensor<S> gz({B, T + 1, d});
    for (Index b = 0; b < B; ++b)
      gz.mat(B * (T + 1), d).row(b * (T + 1)) = gcls.mat(B, d).row(b);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) gz = (*it)->backward(gz);
    Tensor<S> gh({B, T, d});
    for (Index b = 0; b < B; ++b) {
      token_.grad.matrix().noalias() +=
          gz.mat(B * (T + 1), d).row(b * (T + 1)).transpose();
      gh.mat(B * T, d).middleRows(b * T, T) =
          gz.mat(B * (T + 1), d).middleRows(b * (T + 1) + 1, T);
    }
    return rb1_.backward(rb2_.backward(proj_.backward(gh).transpose12()));
  }

  std::vector<Param<S>*> params() {
    std::vector<Param<S>*> out;
    out.push_back(&token_);
    rb1_.collect(out);
    rb2_.collect(out);
    proj_.collect(out);
    for (auto& layer : layers_) layer->collect(out);
    head_.collect(out);
    return out;
  }

  /// Trainable parameter count per top-level block.
  std::vector<std::pair<std::string, Index>> summary() {
    std::vector<std::pair<std::string, Index>> rows;
    rows.emplace_back("class_token", token_.size());
    rows.emplace_back("res_block1", block_count(rb1_));
    rows.emplace_back("res_block2", block_count(rb2_));
    rows.emplace_back("projection", block_count(proj_));
    for (std::size_t i = 0; i < layers_.size(); ++i)
      rows.emplace_back("encoder_layer" + std::to_string(i + 1), block_count(*layers_[i]));
    rows.emplace_back("classifier_head", block_count(head_));
    return rows;
  }

  Index total_params() {
    return trainable_count(params());
  }

  const WordClassifierConfig& config() const { return cfg_; }
  EncoderLayer<S>& layer(Index i) { return *layers_.at(static_cast<std::size_t>(i)); }

 private:
  static Index block_count(Module<S>& m) {
    std::vector<Param<S>*> ps;
    m.collect(ps);
    return trainable_count(ps);
  }

  WordClassifierConfig cfg_;
  Rng rng_;
  ResBlock<S> rb1_, rb2_;
  Linear<S> proj_;
  Param<S> token_;
  std::vector<std::unique_ptr<EncoderLayer<S>>> layers_;
  Linear<S> head_;
  Index batch_ = 0, trunk_len_ = 0;
};

/// EEG window -> per-frame alphabet logits [B, window/4, alphabet] for CTC
/// training and decoding. Same trunk as the classifier, no class token.
template <typename S>
class SeqToSeq {
 public:
  SeqToSeq(const SeqToSeqConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed),
        rb1_(cfg.channels, cfg.d_model, rng_, "res1"),
        rb2_(cfg.d_model, cfg.d_model, rng_, "res2"),
        proj_(cfg.d_model, cfg.d_model, rng_, "proj"),
        head_(cfg.d_model, cfg.alphabet, rng_, "head") {
    detail::check_stack_config(cfg);
    if (cfg.alphabet < 2) throw std::invalid_argument("SeqToSeq: alphabet < 2");
    for (Index i = 0; i < cfg.layers; ++i)
      layers_.push_back(std::make_unique<EncoderLayer<S>>(
          cfg.d_model, cfg.heads, cfg.ffn, cfg.radius, cfg.dropout, rng_,
          seed * 131 + static_cast<std::uint64_t>(i),
          "enc" + std::to_string(i)));
  }

  Index frames() const { return cfg_.window / 4; }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    if (x.rank() != 3 || x.dim(1) != cfg_.channels || x.dim(2) != cfg_.window)
      throw std::invalid_argument("SeqToSeq: expected [B, channels, window]");
    Tensor<S> z = proj_.forward(rb2_.forward(rb1_.forward(x, mode), mode).transpose12(), mode);
    for (auto& layer : layers_) z = layer->forward(z, mode);
    return head_.forward(z, mode);
  }

  Tensor<S> backward(const Tensor<S>& grad_logits) {
    Tensor<S> gz = head_.backward(grad_logits);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) gz = (*it)->backward(gz);
    return rb1_.backward(rb2_.backward(proj_.backward(gz).transpose12()));
  }

  std::vector<Param<S>*> params() {
    std::vector<Param<S>*> out;
    rb1_.collect(out);
    rb2_.collect(out);
    proj_.collect(out);
    for (auto& layer : layers_) layer->collect(out);
    head_.collect(out);
    return out;
  }

  std::vector<std::pair<std::string, Index>> summary() {
    std::vector<std::pair<std::string, Index>> rows;
    rows.emplace_back("res_block1", block_count(rb1_));
    rows.emplace_back("res_block2", block_count(rb2_));
    rows.emplace_back("projection", block_count(proj_));
    for (std::size_t i = 0; i < layers_.size(); ++i)
      rows.emplace_back("encoder_layer" + std::to_string(i + 1), block_count(*layers_[i]));
    rows.emplace_back("frame_head", block_count(head_));
    return rows;
  }

  Index total_params() { return trainable_count(params()); }

  const SeqToSeqConfig& config() const { return cfg_; }
  EncoderLayer<S>& layer(Index i) { return *layers_.at(static_cast<std::size_t>(i)); }

 private:
  static Index block_count(Module<S>& m) {
    std::vector<Param<S>*> ps;
    m.collect(ps);
    return trainable_count(ps);
  }

  SeqToSeqConfig cfg_;
  Rng rng_;
  ResBlock<S> rb1_, rb2_;
  Linear<S> proj_;
  std::vector<std::unique_ptr<EncoderLayer<S>>> layers_;
  Linear<S> head_;
};

/// Top-k class predictions per batch row (ties resolve to the lower index).
template <typename S>
std::vector<std::vector<int>> predict_topk(WordClassifier<S>& model, const Tensor<S>& x,
                                           Index k) {
  Tensor<S> logits = model.forward(x, Mode::kEval);
  std::vector<std::vector<int>> out;
  for (Index b = 0; b < logits.dim(0); ++b) out.push_back(topk_indices(logits, b, k));
  return out;
}

}  // namespace eegtext
