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

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "eegtext/trainer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"eegtext: EEG-to-text decoding toolkit"};
  app.require_subcommand(1);

  // synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset");
  eegtext::SynthConfig sc;
  std::string synth_out;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--subjects", sc.n_subjects, "Number of subjects");
  synth->add_option("--channels", sc.channels, "EEG channels per recording");
  synth->add_option("--fs", sc.fs, "Sampling rate in Hz");
  synth->add_option("--vocab", sc.vocab_size, "Vocabulary size");
  synth->add_option("--sentences", sc.n_sentences, "Number of sentences");
  synth->add_option("--words-per-sentence", sc.words_per_sentence, "Words per sentence");
  synth->add_option("--snr", sc.snr, "Template-to-noise power ratio (inf = noiseless)");
  synth->add_option("--word-s", sc.word_s, "Word duration in seconds");
  synth->add_option("--lead-in-s", sc.lead_in_s, "Silent lead-in in seconds");

  // preprocess ----------------------------------------------------------
  auto* pre = app.add_subcommand("preprocess", "Run the signal pipeline over a dataset");
  eegtext::PreprocessConfig pc;
  pre->add_option("--in", pc.in, "Input dataset directory")->required();
  pre->add_option("--out", pc.out, "Output dataset directory")->required();
  pre->add_option("--track", pc.track, "Output track: raw or feats")
      ->check(CLI::IsMember({"raw", "feats"}));

  // train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a model");
  eegtext::RunConfig rc;
  train->set_config("--config", "", "INI config file (command line overrides)");
  train->add_option("--data", rc.data, "Preprocessed dataset directory")->required();
  train->add_option("--out", rc.out, "Output directory")->required();
  train->add_option("--task", rc.task, "classifier | seq2seq | vae")
      ->check(CLI::IsMember({"classifier", "seq2seq", "vae"}));
  train->add_option("--seed", rc.seed, "Run seed");
  train->add_option("--val-frac", rc.val_frac, "Validation fraction");
  train->add_flag("--stratify,!--no-stratify", rc.stratify,
                  "Split by sentence identity (default on)");
  train->add_option("--word-window", rc.word_window, "Word window in samples (multiple of 4)");
  train->add_option("--sentence-window", rc.sentence_window,
                    "Sentence window in samples (multiple of 4)");
  train->add_option("--preset", rc.preset, "Model size: desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  train->add_option("--dropout", rc.dropout, "Dropout probability");
  train->add_option("--epochs", rc.epochs, "Training epochs");
  train->add_option("--batch", rc.batch, "Batch size");
  train->add_option("--lr", rc.lr, "Adam learning rate");
  train->add_flag("--inverse-freq", rc.inverse_freq,
                  "Inverse-frequency class weighting (classifier)");
  train->add_option("--time-mask-frac", rc.time_mask_frac, "Max time-mask width fraction");
  train->add_option("--time-masks", rc.time_masks, "Time masks per example");
  train->add_option("--freq-mask-frac", rc.freq_mask_frac, "Max frequency-band fraction");
  train->add_option("--freq-masks", rc.freq_masks, "Frequency masks per example");
  train->add_option("--beam", rc.beam, "CTC beam width for final decoding");
  train->add_option("--vae-hidden1", rc.vae_hidden1, "VAE first hidden width");
  train->add_option("--vae-hidden2", rc.vae_hidden2, "VAE second hidden width");
  train->add_option("--vae-latent", rc.vae_latent, "VAE latent dimension");
  train->add_option("--vae-beta", rc.vae_beta, "KL weight");
  train->add_option("--vae-epochs", rc.vae_epochs, "VAE training epochs");
  train->add_option("--augment-p", rc.augment_p,
                    "Probability of replacing a training window with a VAE sample");
  train->add_option("--vae-dir", rc.vae_dir, "Directory with vae.ckpt + latent_stats.json");

  // evaluate ------------------------------------------------------------
  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
  eegtext::EvalConfig ec;
  eval->add_option("--data", ec.data, "Dataset directory")->required();
  eval->add_option("--model", ec.model, "Checkpoint path")->required();
  eval->add_option("--out", ec.out, "Optional output directory for eval.json");
  eval->add_option("--beam", ec.beam, "Beam width override (0 = from checkpoint)");

  // augment-stats -------------------------------------------------------
  auto* astats = app.add_subcommand("augment-stats",
                                    "Fit per-word latent statistics for a trained VAE");
  eegtext::RunConfig ac;
  astats->add_option("--data", ac.data, "Preprocessed dataset directory")->required();
  astats->add_option("--vae-dir", ac.vae_dir, "Directory holding vae.ckpt")->required();
  astats->add_option("--out", ac.out, "Output directory")->required();
  astats->add_option("--seed", ac.seed, "Split seed");
  astats->add_option("--val-frac", ac.val_frac, "Validation fraction");
  astats->add_flag("--stratify,!--no-stratify", ac.stratify, "Split by sentence identity");
  astats->add_option("--word-window", ac.word_window, "Word window in samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return eegtext::run_synth(sc, synth_out, synth_seed);
    if (*pre) return eegtext::run_preprocess(pc);
    if (*train) return eegtext::run_train(rc);
    if (*eval) return eegtext::run_evaluate(ec);
    if (*astats) return eegtext::run_augment_stats(ac);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
