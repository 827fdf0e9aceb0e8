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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eegtext/dataio.hpp"
#include "eegtext/nn.hpp"
#include "eegtext/objectives.hpp"

namespace eegtext {

struct VaeConfig {
  Index input_dim = 0;  // flattened channels * window
  Index hidden1 = 512;
  Index hidden2 = 256;
  Index latent = 64;

  static VaeConfig full_scale(Index input_dim) {
    VaeConfig c;
    c.input_dim = input_dim;
    return c;
  }

  static VaeConfig desk(Index input_dim) {
    VaeConfig c;
    c.input_dim = input_dim;
    c.hidden1 = 128;
    c.hidden2 = 64;
    c.latent = 16;
    return c;
  }
};

/// z = mu + exp(logvar / 2) * eps.
template <typename S>
Tensor<S> reparameterize(const Tensor<S>& mu, const Tensor<S>& logvar, const Tensor<S>& eps) {
  if (!mu.same_shape(logvar) || !mu.same_shape(eps))
    throw std::invalid_argument("reparameterize: shape mismatch");
  Tensor<S> z(mu.shape);
  z.data = mu.data + (logvar.data * S(0.5)).exp() * eps.data;
  return z;
}

template <typename S>
Tensor<S> draw_standard_normal(std::vector<Index> shape, Rng& rng) {
  Tensor<S> out(std::move(shape));
  for (Index i = 0; i < out.numel(); ++i) out.data[i] = static_cast<S>(rng.normal(0.0, 1.0));
  return out;
}

/// Fully connected Gaussian-latent autoencoder over flattened EEG windows.
/// Encoder x -> (mu, logvar); decoder z -> x_hat; linear output.
template <typename S>
class Vae {
 public:
  struct ForwardResult {
    Tensor<S> mu, logvar, eps, z, x_hat;
  };

  Vae(const VaeConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed),
        enc1_(cfg.input_dim, cfg.hidden1, rng_, "enc.fc1"),
        enc2_(cfg.hidden1, cfg.hidden2, rng_, "enc.fc2"),
        enc_mu_(cfg.hidden2, cfg.latent, rng_, "enc.mu"),
        enc_lv_(cfg.hidden2, cfg.latent, rng_, "enc.logvar"),
        dec1_(cfg.latent, cfg.hidden2, rng_, "dec.fc1"),
        dec2_(cfg.hidden2, cfg.hidden1, rng_, "dec.fc2"),
        dec_out_(cfg.hidden1, cfg.input_dim, rng_, "dec.out") {
    if (cfg.input_dim < 1 || cfg.hidden1 < 1 || cfg.hidden2 < 1 || cfg.latent < 1)
      throw std::invalid_argument("Vae: non-positive dimension");
  }

  std::pair<Tensor<S>, Tensor<S>> encode(const Tensor<S>& x, Mode mode) {
    if (x.last() != cfg_.input_dim) throw std::invalid_argument("Vae::encode: dim mismatch");
    Tensor<S> h = enc_relu2_.forward(
        enc2_.forward(enc_relu1_.forward(enc1_.forward(x, mode), mode), mode), mode);
    return {enc_mu_.forward(h, mode), enc_lv_.forward(h, mode)};
  }

  Tensor<S> decode(const Tensor<S>& z, Mode mode) {
    if (z.last() != cfg_.latent) throw std::invalid_argument("Vae::decode: dim mismatch");
    return dec_out_.forward(
        dec_relu2_.forward(dec2_.forward(dec_relu1_.forward(dec1_.forward(z, mode), mode), mode),
                           mode),
        mode);
  }

  ForwardResult forward(const Tensor<S>& x, Mode mode, Rng& rng) {
    ForwardResult fr;
    std::tie(fr.mu, fr.logvar) = encode(x, mode);
    fr.eps = draw_standard_normal<S>(fr.mu.shape, rng);
    fr.z = reparameterize(fr.mu, fr.logvar, fr.eps);
    fr.x_hat = decode(fr.z, mode);
    return fr;
  }

  /// Accumulates parameter gradients for a forward() pass given the loss
  /// gradients with respect to x_hat, mu, and logvar.
  void backward(const ForwardResult& fr, const Tensor<S>& grad_xhat, const Tensor<S>& grad_mu,
                const Tensor<S>& grad_logvar) {
    Tensor<S> gz = dec1_.backward(dec_relu1_.backward(
        dec2_.backward(dec_relu2_.backward(dec_out_.backward(grad_xhat)))));
    Tensor<S> gmu(fr.mu.shape);
    gmu.data = grad_mu.data + gz.data;
    Tensor<S> glv(fr.logvar.shape);
    glv.data = grad_logvar.data +
               gz.data * fr.eps.data * (fr.logvar.data * S(0.5)).exp() * S(0.5);
    Tensor<S> gh = enc_mu_.backward(gmu);
    gh.data += enc_lv_.backward(glv).data;
    enc1_.backward(enc_relu1_.backward(enc2_.backward(enc_relu2_.backward(gh))));
  }

  std::vector<Param<S>*> params() {
    std::vector<Param<S>*> out;
    for (Module<S>* m : std::vector<Module<S>*>{&enc1_, &enc2_, &enc_mu_, &enc_lv_, &dec1_,
                                                &dec2_, &dec_out_})
      m->collect(out);
    return out;
  }

  Index total_params() { return trainable_count(params()); }
  const VaeConfig& config() const { return cfg_; }

 private:
  VaeConfig cfg_;
  Rng rng_;
  Linear<S> enc1_;
  ReLU<S> enc_relu1_;
  Linear<S> enc2_;
  ReLU<S> enc_relu2_;
  Linear<S> enc_mu_, enc_lv_;
  Linear<S> dec1_;
  ReLU<S> dec_relu1_;
  Linear<S> dec2_;
  ReLU<S> dec_relu2_;
  Linear<S> dec_out_;
};

/// Flattens a [C, W] window into a length C*W tensor row (channel-major).
template <typename S>
Tensor<S> flatten_window(const SignalMatrix<S>& window) {
  Tensor<S> out({window.rows() * window.cols()});
  Eigen::Map<MatrixRM<S>>(out.data.data(), window.rows(), window.cols()) =
      window.template cast<S>();
  return out;
}

template <typename S>
SignalMatrix<S> unflatten_window(const Tensor<S>& flat, Index channels, Index window) {
  if (flat.numel() != channels * window)
    throw std::invalid_argument("unflatten_window: size mismatch");
  SignalMatrix<S> out(channels, window);
  Eigen::Map<const MatrixRM<S>> view(flat.data.data(), channels, window);
  out = view;
  return out;
}

struct VaeTrainConfig {
  Index epochs = 40;
  Index batch = 32;
  double lr = 1e-3;
  double beta = 1.0;
};

struct VaeTrainStats {
  std::vector<double> epoch_total, epoch_recon, epoch_kl;
};

/// Minibatch Adam training on rows of `examples` ([N, D] flattened windows).
template <typename S>
VaeTrainStats train_vae(Vae<S>& vae, const Tensor<S>& examples, const VaeTrainConfig& cfg,
                        Rng& rng) {
  if (examples.rank() != 2 || examples.dim(1) != vae.config().input_dim)
    throw std::invalid_argument("train_vae: expected [N, input_dim] examples");
  const Index N = examples.dim(0);
  if (N < 1) throw std::invalid_argument("train_vae: empty training set");
  Adam<S> opt(vae.params(), cfg.lr);
  VaeTrainStats stats;
  std::vector<Index> order(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  const Index D = vae.config().input_dim;
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }
    double total = 0, recon = 0, kl = 0;
    Index batches = 0;
    for (Index start = 0; start < N; start += cfg.batch) {
      const Index bs = std::min(cfg.batch, N - start);
      Tensor<S> x({bs, D});
      for (Index b = 0; b < bs; ++b)
        x.mat(bs, D).row(b) =
            examples.mat(N, D).row(order[static_cast<std::size_t>(start + b)]);
      opt.zero_grad();
      auto fr = vae.forward(x, Mode::kTrain, rng);
      auto loss = vae_loss(fr.x_hat, x, fr.mu, fr.logvar, cfg.beta);
      vae.backward(fr, loss.grad_recon, loss.grad_mu, loss.grad_logvar);
      opt.step();
      total += loss.total;
      recon += loss.recon;
      kl += loss.kl;
      ++batches;
    }
    stats.epoch_total.push_back(total / static_cast<double>(batches));
    stats.epoch_recon.push_back(recon / static_cast<double>(batches));
    stats.epoch_kl.push_back(kl / static_cast<double>(batches));
  }
  return stats;
}

/// Per-word Gaussian fit over encoder means: sample mean and population
/// standard deviation of mu per latent dimension.
struct WordLatentStats {
  std::int64_t count = 0;
  Eigen::ArrayXd mean, sd;
};

struct LatentStats {
  Index latent = 0;
  Index channels = 0;
  Index window = 0;
  std::map<std::string, WordLatentStats> words;

  void save(const std::string& path) const;
  static LatentStats load(const std::string& path);
};

template <typename S>
LatentStats fit_latent_stats(Vae<S>& vae, const std::vector<WordExample>& examples,
                             const Vocabulary& vocab, Index channels, Index window) {
  if (channels * window != vae.config().input_dim)
    throw std::invalid_argument("fit_latent_stats: window dims do not match the VAE input");
  LatentStats stats;
  stats.latent = vae.config().latent;
  stats.channels = channels;
  stats.window = window;
  const Index Z = stats.latent;
  std::map<std::string, std::vector<Eigen::ArrayXd>> mus;
  for (const auto& ex : examples) {
    if (ex.window.rows() != channels || ex.window.cols() != window)
      throw std::invalid_argument("fit_latent_stats: example window shape mismatch");
    Tensor<S> x({1, channels * window});
    x.data = flatten_window<S>(ex.window.template cast<S>()).data;
    auto [mu, logvar] = vae.encode(x, Mode::kEval);
    (void)logvar;
    mus[vocab.token(ex.label)].push_back(mu.data.template cast<double>());
  }
  for (const auto& [token, rows] : mus) {
    WordLatentStats ws;
    ws.count = static_cast<std::int64_t>(rows.size());
    ws.mean = Eigen::ArrayXd::Zero(Z);
    for (const auto& r : rows) ws.mean += r;
    ws.mean /= static_cast<double>(rows.size());
    ws.sd = Eigen::ArrayXd::Zero(Z);
    for (const auto& r : rows) ws.sd += (r - ws.mean).square();
    ws.sd = (ws.sd / static_cast<double>(rows.size())).sqrt();
    stats.words[token] = std::move(ws);
  }
  return stats;
}

/// Draws a latent vector from the fitted per-word Gaussian.
inline Eigen::ArrayXd sample_latent(const LatentStats& stats, const std::string& token,
                                    Rng& rng) {
  const auto it = stats.words.find(token);
  if (it == stats.words.end())
    throw std::invalid_argument("sample_latent: no statistics for word: " + token);
  Eigen::ArrayXd z(stats.latent);
  for (Index j = 0; j < stats.latent; ++j)
    z[j] = it->second.mean[j] + it->second.sd[j] * rng.normal(0.0, 1.0);
  return z;
}

/// Synthetic [channels, window] signal for a word: latent draw -> decoder.
template <typename S>
SignalMatrix<S> sample_synthetic(Vae<S>& vae, const LatentStats& stats, const std::string& token,
                                 Rng& rng) {
  const Eigen::ArrayXd z = sample_latent(stats, token, rng);
  Tensor<S> zt({1, stats.latent});
  zt.data = z.cast<S>();
  Tensor<S> flat = vae.decode(zt, Mode::kEval);
  return unflatten_window(flat, stats.channels, stats.window);
}

struct AugmentResult {
  Index replaced = 0;
  Index missing = 0;  // examples whose word has no fitted statistics
};

/// Replaces each example's window with a synthetic draw with probability p.
/// Words without statistics are left untouched and counted. p = 0 never
/// consumes randomness beyond the per-example coin, so it is an identity.
template <typename S>
AugmentResult augment_batch(std::vector<WordExample>& batch, Vae<S>& vae,
                            const LatentStats& stats, const Vocabulary& vocab, double p,
                            Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("augment_batch: p outside [0, 1]");
  AugmentResult out;
  for (auto& ex : batch) {
    if (!rng.bernoulli(p)) continue;
    const std::string& token = vocab.token(ex.label);
    if (!stats.words.count(token)) {
      ++out.missing;
      continue;
    }
    ex.window = sample_synthetic(vae, stats, token, rng).template cast<float>();
    ++out.replaced;
  }
  return out;
}

}  // namespace eegtext
