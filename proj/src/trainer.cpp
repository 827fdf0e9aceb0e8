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

#include "eegtext/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "eegtext/augvae.hpp"
#include "eegtext/checkpoint.hpp"
#include "eegtext/ctc_decode.hpp"
#include "eegtext/models.hpp"
#include "eegtext/objectives.hpp"
#include "eegtext/signal.hpp"

namespace eegtext {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Independent deterministic child streams from one master seed.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const fs::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
  }
  void write(const json& j) { out_ << j.dump() << '\n'; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Example assembly
// ---------------------------------------------------------------------------

std::vector<WordExample> all_word_examples(const Dataset& ds, Index window, Index* overruns) {
  std::vector<WordExample> out;
  Index over = 0;
  for (const auto& rec : ds.recordings) {
    auto slices = slice_word_windows(rec.data, ds.fs, rec.subject_id, ds.events, ds.vocab,
                                     window);
    over += slices.overruns;
    for (auto& ex : slices.examples) out.push_back(std::move(ex));
  }
  if (overruns) *overruns = over;
  return out;
}

std::vector<SentenceExample> all_sentence_examples(const Dataset& ds, Index window) {
  std::vector<SentenceExample> out;
  for (const auto& rec : ds.recordings) {
    auto slices =
        slice_sentence_windows(rec.data, ds.fs, rec.subject_id, ds.events, ds.charset, window);
    for (auto& ex : slices) out.push_back(std::move(ex));
  }
  return out;
}

template <typename Ex>
SplitResult<Ex> make_split(const std::vector<Ex>& examples, const RunConfig& cfg) {
  Rng rng(child_seed(cfg.seed, 1));
  if (cfg.stratify) return stratified_sentence_split(examples, cfg.val_frac, rng);
  return random_example_split(examples, cfg.val_frac, rng);
}

/// Copies one window, applying train-time masking.
SignalMatrixF masked_window(const SignalMatrixF& w, const RunConfig& cfg, Rng& rng) {
  SignalMatrixF out = w;
  if (cfg.time_masks > 0 && cfg.time_mask_frac > 0.0)
    out = time_mask(out, cfg.time_mask_frac, cfg.time_masks, rng);
  if (cfg.freq_masks > 0 && cfg.freq_mask_frac > 0.0)
    out = freq_mask(out, cfg.freq_mask_frac, cfg.freq_masks, rng);
  return out;
}

template <typename Ex>
Tensor<float> window_batch(const std::vector<Ex>& examples, const std::vector<Index>& order,
                           Index start, Index bs) {
  const auto& first = examples[static_cast<std::size_t>(order[static_cast<std::size_t>(start)])];
  const Index C = first.window.rows(), W = first.window.cols();
  Tensor<float> x({bs, C, W});
  for (Index b = 0; b < bs; ++b) {
    const auto& ex =
        examples[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])];
    x.mat(bs * C, W).middleRows(b * C, C) = ex.window;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Model construction and checkpointing
// ---------------------------------------------------------------------------

WordClassifierConfig classifier_config(const RunConfig& cfg, Index channels, Index classes) {
  WordClassifierConfig mc = cfg.preset == "full"
                                ? WordClassifierConfig::full_scale()
                                : WordClassifierConfig::desk(channels, cfg.word_window, classes);
  mc.channels = channels;
  mc.window = cfg.word_window;
  mc.classes = classes;
  mc.dropout = cfg.dropout;
  return mc;
}

SeqToSeqConfig seq2seq_config(const RunConfig& cfg, Index channels, Index alphabet) {
  SeqToSeqConfig mc = cfg.preset == "full"
                          ? SeqToSeqConfig::full_scale()
                          : SeqToSeqConfig::desk(channels, cfg.sentence_window, alphabet);
  mc.channels = channels;
  mc.window = cfg.sentence_window;
  mc.alphabet = alphabet;
  mc.dropout = cfg.dropout;
  return mc;
}

json stack_config_json(const EncoderStackConfig& mc) {
  return json{{"channels", mc.channels}, {"window", mc.window},   {"d_model", mc.d_model},
              {"layers", mc.layers},     {"heads", mc.heads},     {"ffn", mc.ffn},
              {"radius", mc.radius},     {"dropout", mc.dropout}};
}

void stack_config_from_json(const json& j, EncoderStackConfig& mc) {
  mc.channels = j.at("channels").get<Index>();
  mc.window = j.at("window").get<Index>();
  mc.d_model = j.at("d_model").get<Index>();
  mc.layers = j.at("layers").get<Index>();
  mc.heads = j.at("heads").get<Index>();
  mc.ffn = j.at("ffn").get<Index>();
  mc.radius = j.at("radius").get<Index>();
  mc.dropout = j.at("dropout").get<double>();
}

json run_config_json(const RunConfig& cfg) {
  return json{{"seed", cfg.seed},
              {"val_frac", cfg.val_frac},
              {"stratify", cfg.stratify},
              {"word_window", cfg.word_window},
              {"sentence_window", cfg.sentence_window},
              {"beam", cfg.beam}};
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ClsMetrics {
  double loss = 0.0, top1 = 0.0, top10 = 0.0;
};

ClsMetrics classifier_metrics(WordClassifier<float>& model, const std::vector<WordExample>& exs,
                              Index batch, const std::vector<double>& weights) {
  ClsMetrics m;
  if (exs.empty()) return m;
  const Index N = static_cast<Index>(exs.size());
  std::vector<Index> order(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  double loss_weight = 0.0;
  Index hits1 = 0, hits10 = 0;
  for (Index start = 0; start < N; start += batch) {
    const Index bs = std::min(batch, N - start);
    Tensor<float> x = window_batch(exs, order, start, bs);
    std::vector<int> targets;
    for (Index b = 0; b < bs; ++b)
      targets.push_back(exs[static_cast<std::size_t>(start + b)].label);
    Tensor<float> logits = model.forward(x, Mode::kEval);
    auto loss = cross_entropy(logits, targets, weights);
    // Convert the weighted mean back into a batch-size weighting so the
    // aggregate over unequal batches stays exact.
    double wsum = 0.0;
    for (int t : targets) wsum += weights.empty() ? 1.0 : weights[static_cast<std::size_t>(t)];
    m.loss += loss.value * wsum;
    loss_weight += wsum;
    for (Index b = 0; b < bs; ++b) {
      const auto top = topk_indices(logits, b, 10);
      if (top[0] == targets[static_cast<std::size_t>(b)]) ++hits1;
      for (int c : top)
        if (c == targets[static_cast<std::size_t>(b)]) {
          ++hits10;
          break;
        }
    }
  }
  m.loss /= loss_weight;
  m.top1 = static_cast<double>(hits1) / static_cast<double>(N);
  m.top10 = static_cast<double>(hits10) / static_cast<double>(N);
  return m;
}

struct SeqMetrics {
  double loss = 0.0;
  double wer = 0.0;
  WerCounts counts;
};

SeqMetrics seq2seq_metrics(SeqToSeq<float>& model, const std::vector<SentenceExample>& exs,
                           const Charset& charset, Index batch, Index beam) {
  SeqMetrics m;
  if (exs.empty()) return m;
  const Index N = static_cast<Index>(exs.size());
  const Index F = model.frames(), A = model.config().alphabet;
  std::vector<Index> order(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  for (Index start = 0; start < N; start += batch) {
    const Index bs = std::min(batch, N - start);
    Tensor<float> x = window_batch(exs, order, start, bs);
    Tensor<float> logits = model.forward(x, Mode::kEval);
    for (Index b = 0; b < bs; ++b) {
      const auto& ex = exs[static_cast<std::size_t>(start + b)];
      Tensor<float> row({F, A});
      row.mat(F, A) = logits.mat(bs * F, A).middleRows(b * F, F);
      m.loss += ctc_loss(row, ex.target).value;
      const std::vector<int> hyp =
          beam > 1 ? ctc_beam_best(row, beam) : ctc_greedy_decode(row);
      m.counts += wer_counts(split_words(ex.text), split_words(charset.decode(hyp)));
    }
  }
  m.loss /= static_cast<double>(N);
  m.wer = m.counts.value();
  return m;
}

// ---------------------------------------------------------------------------
// Task: classifier
// ---------------------------------------------------------------------------

int train_classifier(const RunConfig& cfg, const Dataset& ds, const fs::path& out_dir) {
  Index overruns = 0;
  auto examples = all_word_examples(ds, cfg.word_window, &overruns);
  auto split = make_split(examples, cfg);
  const Index classes = ds.vocab.size();

  std::vector<double> weights;
  if (cfg.inverse_freq) {
    // Count over the train split; words the split never sees get a floor of
    // one occurrence so the weight vector stays finite.
    std::vector<std::int64_t> counts(static_cast<std::size_t>(classes), 0);
    for (const auto& ex : split.train) ++counts[static_cast<std::size_t>(ex.label)];
    for (auto& c : counts) c = std::max<std::int64_t>(c, 1);
    weights = inverse_frequency_weights(counts);
  }

  const WordClassifierConfig mc = classifier_config(cfg, ds.channels, classes);
  WordClassifier<float> model(mc, child_seed(cfg.seed, 0));

  // Optional VAE-backed replacement augmentation.
  std::unique_ptr<Vae<float>> vae;
  LatentStats stats;
  if (cfg.augment_p > 0.0) {
    if (cfg.vae_dir.empty())
      throw std::invalid_argument("train: augment_p > 0 requires vae_dir");
    const Checkpoint vc = load_checkpoint((fs::path(cfg.vae_dir) / "vae.ckpt").string());
    VaeConfig vcfg;
    vcfg.input_dim = vc.config.at("input_dim").get<Index>();
    vcfg.hidden1 = vc.config.at("hidden1").get<Index>();
    vcfg.hidden2 = vc.config.at("hidden2").get<Index>();
    vcfg.latent = vc.config.at("latent").get<Index>();
    vae = std::make_unique<Vae<float>>(vcfg, vc.seed);
    restore_params(vc, vae->params());
    stats = LatentStats::load((fs::path(cfg.vae_dir) / "latent_stats.json").string());
    if (stats.channels != ds.channels || stats.window != cfg.word_window)
      throw std::invalid_argument("train: latent stats were fitted for different window dims");
  }

  Adam<float> opt(model.params(), cfg.lr);
  Rng rng_shuffle(child_seed(cfg.seed, 2));
  Rng rng_aug(child_seed(cfg.seed, 3));

  JsonlWriter metrics(out_dir / "metrics.jsonl");
  const Index N = static_cast<Index>(split.train.size());
  std::vector<Index> order(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;

  double best_val = -1.0;
  const json ckpt_cfg = [&] {
    json j = stack_config_json(mc);
    j["classes"] = mc.classes;
    j.update(run_config_json(cfg));
    return j;
  }();

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const auto j =
          static_cast<std::size_t>(rng_shuffle.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }
    double train_loss = 0.0, loss_weight = 0.0;
    Index hits = 0;
    for (Index start = 0; start < N; start += cfg.batch) {
      const Index bs = std::min(cfg.batch, N - start);
      std::vector<WordExample> batch;
      batch.reserve(static_cast<std::size_t>(bs));
      for (Index b = 0; b < bs; ++b)
        batch.push_back(
            split.train[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])]);
      if (vae) augment_batch(batch, *vae, stats, ds.vocab, cfg.augment_p, rng_aug);
      Tensor<float> x({bs, ds.channels, cfg.word_window});
      std::vector<int> targets;
      for (Index b = 0; b < bs; ++b) {
        x.mat(bs * ds.channels, cfg.word_window).middleRows(b * ds.channels, ds.channels) =
            masked_window(batch[static_cast<std::size_t>(b)].window, cfg, rng_aug);
        targets.push_back(batch[static_cast<std::size_t>(b)].label);
      }
      opt.zero_grad();
      Tensor<float> logits = model.forward(x, Mode::kTrain);
      auto loss = cross_entropy(logits, targets, weights);
      model.backward(loss.grad);
      opt.step();
      double wsum = 0.0;
      for (int t : targets)
        wsum += weights.empty() ? 1.0 : weights[static_cast<std::size_t>(t)];
      train_loss += loss.value * wsum;
      loss_weight += wsum;
      for (Index b = 0; b < bs; ++b)
        if (topk_indices(logits, b, 1)[0] == targets[static_cast<std::size_t>(b)]) ++hits;
    }
    const ClsMetrics val = classifier_metrics(model, split.val, cfg.batch, weights);
    json line{{"epoch", epoch},
              {"train_loss", train_loss / loss_weight},
              {"train_acc", static_cast<double>(hits) / static_cast<double>(N)},
              {"val_loss", val.loss},
              {"val_acc", val.top1}};
    metrics.write(line);
    metrics.flush();
    save_checkpoint((out_dir / "last.ckpt").string(), "classifier", ckpt_cfg,
                    cfg.seed, epoch, model.params());
    if (val.top1 > best_val) {
      best_val = val.top1;
      save_checkpoint((out_dir / "best.ckpt").string(), "classifier", ckpt_cfg,
                      cfg.seed, epoch, model.params());
    }
  }

  const ClsMetrics train_m = classifier_metrics(model, split.train, cfg.batch, weights);
  const ClsMetrics val_m = classifier_metrics(model, split.val, cfg.batch, weights);
  json summary{{"task", "classifier"},
               {"params", model.total_params()},
               {"train_examples", static_cast<Index>(split.train.size())},
               {"val_examples", static_cast<Index>(split.val.size())},
               {"window_overruns", overruns},
               {"train_loss", train_m.loss},
               {"train_acc", train_m.top1},
               {"train_top10", train_m.top10},
               {"val_loss", val_m.loss},
               {"val_acc", val_m.top1},
               {"val_top10", val_m.top10}};
  write_json_file(out_dir / "summary.json", summary);
  std::cout << "classifier: val_acc " << val_m.top1 << ", val_top10 " << val_m.top10 << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// Task: seq2seq
// ---------------------------------------------------------------------------

int train_seq2seq(const RunConfig& cfg, const Dataset& ds, const fs::path& out_dir) {
  auto examples = all_sentence_examples(ds, cfg.sentence_window);
  auto split = make_split(examples, cfg);
  const Index A = ds.charset.size();
  const SeqToSeqConfig mc = seq2seq_config(cfg, ds.channels, A);
  SeqToSeq<float> model(mc, child_seed(cfg.seed, 0));
  const Index F = model.frames();

  Adam<float> opt(model.params(), cfg.lr);
  Rng rng_shuffle(child_seed(cfg.seed, 2));
  Rng rng_aug(child_seed(cfg.seed, 3));

  JsonlWriter metrics(out_dir / "metrics.jsonl");
  const Index N = static_cast<Index>(split.train.size());
  std::vector<Index> order(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;

  double best_val = std::numeric_limits<double>::infinity();
  const json ckpt_cfg = [&] {
    json j = stack_config_json(mc);
    j["alphabet"] = mc.alphabet;
    j.update(run_config_json(cfg));
    return j;
  }();

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const auto j =
          static_cast<std::size_t>(rng_shuffle.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }
    double train_loss = 0.0;
    for (Index start = 0; start < N; start += cfg.batch) {
      const Index bs = std::min(cfg.batch, N - start);
      Tensor<float> x({bs, ds.channels, cfg.sentence_window});
      for (Index b = 0; b < bs; ++b) {
        const auto& ex =
            split.train[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])];
        x.mat(bs * ds.channels, cfg.sentence_window)
            .middleRows(b * ds.channels, ds.channels) = masked_window(ex.window, cfg, rng_aug);
      }
      opt.zero_grad();
      Tensor<float> logits = model.forward(x, Mode::kTrain);
      Tensor<float> grad(logits.shape);
      for (Index b = 0; b < bs; ++b) {
        const auto& ex =
            split.train[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])];
        Tensor<float> row({F, A});
        row.mat(F, A) = logits.mat(bs * F, A).middleRows(b * F, F);
        auto loss = ctc_loss(row, ex.target);
        train_loss += loss.value;
        grad.mat(bs * F, A).middleRows(b * F, F) =
            loss.grad.mat(F, A) / static_cast<float>(bs);
      }
      model.backward(grad);
      opt.step();
    }
    // Greedy decoding keeps the per-epoch validation pass cheap.
    const SeqMetrics val = seq2seq_metrics(model, split.val, ds.charset, cfg.batch, 1);
    json line{{"epoch", epoch},
              {"train_loss", train_loss / static_cast<double>(N)},
              {"val_loss", val.loss},
              {"val_wer", val.wer}};
    metrics.write(line);
    metrics.flush();
    save_checkpoint((out_dir / "last.ckpt").string(), "seq2seq", ckpt_cfg, cfg.seed, epoch,
                    model.params());
    if (val.wer < best_val) {
      best_val = val.wer;
      save_checkpoint((out_dir / "best.ckpt").string(), "seq2seq", ckpt_cfg, cfg.seed, epoch,
                      model.params());
    }
  }

  const SeqMetrics train_m =
      seq2seq_metrics(model, split.train, ds.charset, cfg.batch, cfg.beam);
  const SeqMetrics val_m = seq2seq_metrics(model, split.val, ds.charset, cfg.batch, cfg.beam);
  json summary{{"task", "seq2seq"},
               {"params", model.total_params()},
               {"train_examples", static_cast<Index>(split.train.size())},
               {"val_examples", static_cast<Index>(split.val.size())},
               {"beam", cfg.beam},
               {"train_loss", train_m.loss},
               {"train_wer", train_m.wer},
               {"val_loss", val_m.loss},
               {"val_wer", val_m.wer}};
  write_json_file(out_dir / "summary.json", summary);
  std::cout << "seq2seq: train_wer " << train_m.wer << ", val_wer " << val_m.wer << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// Task: vae
// ---------------------------------------------------------------------------

int train_vae_task(const RunConfig& cfg, const Dataset& ds, const fs::path& out_dir) {
  Index overruns = 0;
  auto examples = all_word_examples(ds, cfg.word_window, &overruns);
  auto split = make_split(examples, cfg);

  VaeConfig vc;
  vc.input_dim = ds.channels * cfg.word_window;
  vc.hidden1 = cfg.vae_hidden1;
  vc.hidden2 = cfg.vae_hidden2;
  vc.latent = cfg.vae_latent;
  Vae<float> vae(vc, child_seed(cfg.seed, 0));

  const Index N = static_cast<Index>(split.train.size());
  Tensor<float> rows({N, vc.input_dim});
  for (Index i = 0; i < N; ++i)
    rows.mat(N, vc.input_dim).row(i) =
        flatten_window<float>(split.train[static_cast<std::size_t>(i)].window)
            .data.matrix()
            .transpose();

  VaeTrainConfig tc;
  tc.epochs = cfg.vae_epochs;
  tc.batch = cfg.batch;
  tc.lr = cfg.lr;
  tc.beta = cfg.vae_beta;
  Rng rng(child_seed(cfg.seed, 2));
  const VaeTrainStats stats = train_vae(vae, rows, tc, rng);

  JsonlWriter metrics(out_dir / "metrics.jsonl");
  for (std::size_t e = 0; e < stats.epoch_total.size(); ++e)
    metrics.write(json{{"epoch", e + 1},
                       {"loss", stats.epoch_total[e]},
                       {"recon", stats.epoch_recon[e]},
                       {"kl", stats.epoch_kl[e]}});

  const json ckpt_cfg{{"input_dim", vc.input_dim}, {"hidden1", vc.hidden1},
                      {"hidden2", vc.hidden2},     {"latent", vc.latent},
                      {"beta", cfg.vae_beta},      {"word_window", cfg.word_window}};
  save_checkpoint((out_dir / "vae.ckpt").string(), "vae", ckpt_cfg, cfg.seed,
                  static_cast<std::int64_t>(stats.epoch_total.size()), vae.params());

  const LatentStats latent =
      fit_latent_stats(vae, split.train, ds.vocab, ds.channels, cfg.word_window);
  latent.save((out_dir / "latent_stats.json").string());

  json summary{{"task", "vae"},
               {"params", vae.total_params()},
               {"train_examples", N},
               {"final_loss", stats.epoch_total.back()},
               {"final_recon", stats.epoch_recon.back()},
               {"final_kl", stats.epoch_kl.back()},
               {"words_with_stats", static_cast<Index>(latent.words.size())}};
  write_json_file(out_dir / "summary.json", summary);
  std::cout << "vae: final loss " << stats.epoch_total.back() << '\n';
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

int run_preprocess(const PreprocessConfig& cfg) {
  if (cfg.track != "raw" && cfg.track != "feats")
    throw std::invalid_argument("preprocess: track must be raw or feats");
  Dataset ds = load_dataset(cfg.in);
  if (!ds.track.empty())
    throw std::invalid_argument("preprocess: dataset already carries track '" + ds.track + "'");
  Dataset out = ds;
  out.track = cfg.track;
  out.recordings.clear();
  for (const auto& rec : ds.recordings) {
    Recording<float> processed;
    processed.subject_id = rec.subject_id;
    processed.fs = rec.fs;
    EegRaw<float> raw = preprocess_raw(rec);
    if (cfg.track == "raw") {
      processed.data = std::move(raw.data);
    } else {
      raw.data = temporal_shift(raw.data, raw.fs);
      EegFeats<float> feats = extract_features(raw);
      processed.data = std::move(feats.data);
    }
    out.recordings.push_back(std::move(processed));
  }
  out.channels = out.recordings.front().data.rows();
  save_dataset(cfg.out, out);
  std::cout << "preprocess: wrote " << out.recordings.size() << " recordings with "
            << out.channels << " rows (track " << cfg.track << ")\n";
  return 0;
}

int run_synth(const SynthConfig& cfg, const std::string& out, std::uint64_t seed) {
  Dataset ds = synth_generate(cfg, seed);
  save_dataset(out, ds);
  std::cout << "synth: wrote " << ds.recordings.size() << " subjects, "
            << ds.events.size() << " events, vocab " << ds.vocab.size() << '\n';
  return 0;
}

int run_train(const RunConfig& cfg) {
  if (cfg.out.empty()) throw std::invalid_argument("train: out directory required");
  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  Dataset ds = load_dataset(cfg.data);
  write_json_file(out_dir / "run_config.json",
                  json{{"task", cfg.task},
                       {"data", cfg.data},
                       {"seed", cfg.seed},
                       {"preset", cfg.preset},
                       {"val_frac", cfg.val_frac},
                       {"stratify", cfg.stratify},
                       {"word_window", cfg.word_window},
                       {"sentence_window", cfg.sentence_window},
                       {"epochs", cfg.epochs},
                       {"batch", cfg.batch},
                       {"lr", cfg.lr},
                       {"dropout", cfg.dropout},
                       {"inverse_freq", cfg.inverse_freq},
                       {"time_mask_frac", cfg.time_mask_frac},
                       {"time_masks", cfg.time_masks},
                       {"freq_mask_frac", cfg.freq_mask_frac},
                       {"freq_masks", cfg.freq_masks},
                       {"beam", cfg.beam},
                       {"augment_p", cfg.augment_p},
                       {"vae_dir", cfg.vae_dir}});
  if (cfg.task == "classifier") return train_classifier(cfg, ds, out_dir);
  if (cfg.task == "seq2seq") return train_seq2seq(cfg, ds, out_dir);
  if (cfg.task == "vae") return train_vae_task(cfg, ds, out_dir);
  throw std::invalid_argument("train: unknown task '" + cfg.task + "'");
}

int run_evaluate(const EvalConfig& cfg) {
  const Checkpoint ckpt = load_checkpoint(cfg.model);
  Dataset ds = load_dataset(cfg.data);
  RunConfig rc;
  rc.seed = ckpt.config.at("seed").get<std::uint64_t>();
  rc.val_frac = ckpt.config.at("val_frac").get<double>();
  rc.stratify = ckpt.config.at("stratify").get<bool>();
  rc.word_window = ckpt.config.at("word_window").get<Index>();
  rc.sentence_window = ckpt.config.at("sentence_window").get<Index>();
  const Index beam = cfg.beam > 0 ? cfg.beam : ckpt.config.at("beam").get<Index>();

  json result{{"model", cfg.model}, {"task", ckpt.model_kind}};
  if (ckpt.model_kind == "classifier") {
    WordClassifierConfig mc;
    stack_config_from_json(ckpt.config, mc);
    mc.classes = ckpt.config.at("classes").get<Index>();
    if (mc.classes != ds.vocab.size())
      throw std::runtime_error("evaluate: checkpoint classes != dataset vocabulary size");
    WordClassifier<float> model(mc, child_seed(rc.seed, 0));
    restore_params(ckpt, model.params());
    auto examples = all_word_examples(ds, rc.word_window, nullptr);
    auto split = make_split(examples, rc);
    const ClsMetrics train_m = classifier_metrics(model, split.train, 16, {});
    const ClsMetrics val_m = classifier_metrics(model, split.val, 16, {});
    result["train_loss"] = train_m.loss;
    result["train_acc"] = train_m.top1;
    result["train_top10"] = train_m.top10;
    result["val_loss"] = val_m.loss;
    result["val_acc"] = val_m.top1;
    result["val_top10"] = val_m.top10;
    std::cout << "evaluate: val_acc " << val_m.top1 << ", val_top10 " << val_m.top10 << '\n';
  } else if (ckpt.model_kind == "seq2seq") {
    SeqToSeqConfig mc;
    stack_config_from_json(ckpt.config, mc);
    mc.alphabet = ckpt.config.at("alphabet").get<Index>();
    if (mc.alphabet != ds.charset.size())
      throw std::runtime_error("evaluate: checkpoint alphabet != dataset charset size");
    SeqToSeq<float> model(mc, child_seed(rc.seed, 0));
    restore_params(ckpt, model.params());
    auto examples = all_sentence_examples(ds, rc.sentence_window);
    auto split = make_split(examples, rc);
    const SeqMetrics train_m = seq2seq_metrics(model, split.train, ds.charset, 16, beam);
    const SeqMetrics val_m = seq2seq_metrics(model, split.val, ds.charset, 16, beam);
    result["beam"] = beam;
    result["train_loss"] = train_m.loss;
    result["train_wer"] = train_m.wer;
    result["val_loss"] = val_m.loss;
    result["val_wer"] = val_m.wer;
    std::cout << "evaluate: train_wer " << train_m.wer << ", val_wer " << val_m.wer << '\n';
  } else {
    throw std::invalid_argument("evaluate: cannot evaluate model kind '" + ckpt.model_kind +
                                "'");
  }
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    write_json_file(fs::path(cfg.out) / "eval.json", result);
  }
  return 0;
}

int run_augment_stats(const RunConfig& cfg) {
  if (cfg.vae_dir.empty()) throw std::invalid_argument("augment-stats: vae_dir required");
  if (cfg.out.empty()) throw std::invalid_argument("augment-stats: out directory required");
  Dataset ds = load_dataset(cfg.data);
  const Checkpoint vc = load_checkpoint((fs::path(cfg.vae_dir) / "vae.ckpt").string());
  VaeConfig vcfg;
  vcfg.input_dim = vc.config.at("input_dim").get<Index>();
  vcfg.hidden1 = vc.config.at("hidden1").get<Index>();
  vcfg.hidden2 = vc.config.at("hidden2").get<Index>();
  vcfg.latent = vc.config.at("latent").get<Index>();
  Vae<float> vae(vcfg, vc.seed);
  restore_params(vc, vae.params());

  auto examples = all_word_examples(ds, cfg.word_window, nullptr);
  auto split = make_split(examples, cfg);
  const LatentStats stats =
      fit_latent_stats(vae, split.train, ds.vocab, ds.channels, cfg.word_window);
  fs::create_directories(cfg.out);
  stats.save((fs::path(cfg.out) / "latent_stats.json").string());
  std::cout << "augment-stats: fitted " << stats.words.size() << " words from "
            << split.train.size() << " examples\n";
  return 0;
}

}  // namespace eegtext
