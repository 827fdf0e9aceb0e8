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

#include <cstdint>
#include <string>

#include "eegtext/dataio.hpp"

namespace eegtext {

/// Everything a training run needs. Written into checkpoints so evaluate can
/// rebuild the model and the split.
struct RunConfig {
  std::string data;               // dataset directory (preprocessed)
  std::string out;                // output directory
  std::string task = "classifier";  // classifier | seq2seq | vae
  std::uint64_t seed = 1;

  // Split.
  double val_frac = 0.2;
  bool stratify = true;

  // Windows (samples of the stored track; multiples of 4).
  Index word_window = 48;
  Index sentence_window = 240;

  // Model size: "desk" or "full".
  std::string preset = "desk";
  double dropout = 0.1;

  // Optimization.
  Index epochs = 30;
  Index batch = 16;
  double lr = 1e-3;
  bool inverse_freq = false;  // inverse-frequency class weights (classifier)

  // Signal masking augmentation (training examples only).
  double time_mask_frac = 0.0;
  int time_masks = 0;
  double freq_mask_frac = 0.0;
  int freq_masks = 0;

  // CTC decoding.
  Index beam = 8;

  // VAE task dimensions, and VAE-based augmentation for the classifier.
  Index vae_hidden1 = 128;
  Index vae_hidden2 = 64;
  Index vae_latent = 16;
  double vae_beta = 1.0;
  Index vae_epochs = 40;
  double augment_p = 0.0;
  std::string vae_dir;  // directory holding vae.ckpt + latent_stats.json
};

struct PreprocessConfig {
  std::string in;
  std::string out;
  std::string track = "raw";  // raw | feats
};

struct EvalConfig {
  std::string data;
  std::string model;  // checkpoint path
  std::string out;    // optional directory for eval.json
  Index beam = 0;     // 0 = use the beam width stored in the checkpoint
};

/// Applies the signal pipeline to every recording and writes a new dataset
/// directory with track = raw or feats.
int run_preprocess(const PreprocessConfig& cfg);

/// Generates and writes a synthetic dataset.
int run_synth(const SynthConfig& cfg, const std::string& out, std::uint64_t seed);

/// Trains per cfg.task, writing metrics.jsonl, summary.json, and best/last
/// checkpoints under cfg.out. Returns 0 on success.
int run_train(const RunConfig& cfg);

/// Rebuilds a model from a checkpoint and reports split metrics.
int run_evaluate(const EvalConfig& cfg);

/// Fits per-word latent statistics for an existing VAE checkpoint.
int run_augment_stats(const RunConfig& cfg);

}  // namespace eegtext
