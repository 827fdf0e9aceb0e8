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
#include <map>
#include <string>
#include <vector>

#include "eegtext/common.hpp"
#include "eegtext/signal.hpp"

namespace eegtext {

/// One annotated word occurrence.
struct EventRow {
  std::string word;
  double onset_s = 0.0;
  double offset_s = 0.0;
  int sentence_id = 0;
  int word_index = 0;
};

using EventTable = std::vector<EventRow>;

/// Lowercases and strips punctuation, keeping internal apostrophes/hyphens.
std::string normalize_token(const std::string& raw);

/// Lowercases and collapses whitespace runs to single spaces.
std::string normalize_text(const std::string& raw);

/// Unique word tokens in first-occurrence order with dense class indices.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Tokens are normalized; duplicates and empty results are dropped.
  static Vocabulary build(const std::vector<std::string>& raw_tokens);

  /// Index of an already-normalized token, or -1 when absent.
  int index_of(const std::string& token) const;

  Index size() const { return static_cast<Index>(tokens_.size()); }
  const std::string& token(Index i) const { return tokens_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

/// Character alphabet for sequence targets. Index 0 is the CTC blank; the
/// last index is the unknown-symbol slot.
class Charset {
 public:
  Charset() = default;

  /// Symbols from normalized text in first-occurrence order, bracketed by the
  /// blank (index 0) and the unknown slot (last index).
  static Charset build(const std::string& text, std::size_t max_symbols = 256);

  /// The at-scale alphabet: blank, space, a-z, common punctuation, unknown.
  static Charset full_scale();

  /// Rebuilds a charset from an explicit symbol list: "<blank>" first,
  /// "<unk>" last, unique single-character symbols in between.
  static Charset from_symbols(const std::vector<std::string>& symbols);

  Index size() const { return static_cast<Index>(symbols_.size()); }
  int blank() const { return 0; }
  int unknown() const { return static_cast<int>(symbols_.size()) - 1; }

  /// Index of a single-character symbol; the unknown index when absent.
  int index_of(char c) const;

  /// Normalizes text, then maps each character to its index.
  std::vector<int> encode(const std::string& text) const;

  /// Inverse of encode for in-alphabet tokens; blanks are skipped and the
  /// unknown slot renders as "<unk>".
  std::string decode(const std::vector<int>& tokens) const;

  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;  // "<blank>", single chars, "<unk>"
  std::map<char, int> index_;
};

/// A complete on-disk dataset held in memory.
struct Dataset {
  double fs = 0.0;
  Index channels = 0;
  std::string track;  // "", "raw", or "feats"
  std::vector<Recording<float>> recordings;
  EventTable events;
  std::vector<std::string> sentences;  // sentence_id -> normalized text
  std::string text;                    // all sentences joined with '\n'
  Vocabulary vocab;
  Charset charset;
};

/// Reads a dataset directory (manifest.json + per-subject eeg.f32 +
/// events.tsv + vocab.txt + charset.txt), validating shapes and event bounds.
Dataset load_dataset(const std::string& dir);

/// Writes the canonical directory layout. Arrays round-trip bit-exactly.
void save_dataset(const std::string& dir, const Dataset& ds);

/// Normalized text of one sentence: its words joined with single spaces.
std::string sentence_text(const EventTable& events, int sentence_id);

/// Sorted unique sentence ids.
std::vector<int> sentence_ids(const EventTable& events);

std::map<std::string, std::int64_t> word_frequency(const std::vector<std::string>& tokens);

/// One word-aligned window with its class label.
struct WordExample {
  SignalMatrixF window;  // [C, window_samples]
  int label = -1;
  int sentence_id = 0;
  std::string subject_id;
};

/// One sentence-aligned window with its character target.
struct SentenceExample {
  SignalMatrixF window;  // [C, window_samples]
  std::vector<int> target;
  int sentence_id = 0;
  std::string subject_id;
  std::string text;
};

struct WordSlices {
  std::vector<WordExample> examples;
  Index overruns = 0;  // windows that ran past the recording end (zero padded)
};

/// One example per word event, window anchored at the word onset.
/// window_samples must be a positive multiple of 4.
WordSlices slice_word_windows(const SignalMatrixF& eeg, double fs, const std::string& subject_id,
                              const EventTable& events, const Vocabulary& vocab,
                              Index window_samples);

/// One example per sentence, window anchored at the sentence onset and
/// truncated or zero-padded to window_samples. Targets that cannot fit in
/// window_samples / 4 frames under CTC are an error.
std::vector<SentenceExample> slice_sentence_windows(const SignalMatrixF& eeg, double fs,
                                                    const std::string& subject_id,
                                                    const EventTable& events,
                                                    const Charset& charset, Index window_samples);

template <typename Ex>
struct SplitResult {
  std::vector<Ex> train, val;
  std::vector<int> train_sentences, val_sentences;
};

/// Splits by sentence identity: the train and val sentence-id sets are
/// disjoint and every subject's examples for a sentence land on one side.
template <typename Ex>
SplitResult<Ex> stratified_sentence_split(const std::vector<Ex>& examples, double val_frac,
                                          Rng& rng) {
  if (!(val_frac > 0.0 && val_frac < 1.0))
    throw std::invalid_argument("stratified_sentence_split: val_frac outside (0, 1)");
  std::vector<int> ids;
  for (const auto& ex : examples) ids.push_back(ex.sentence_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2)
    throw std::invalid_argument("stratified_sentence_split: fewer than 2 sentences");

  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(ids[i], ids[j]);
  }
  const auto n = static_cast<std::int64_t>(ids.size());
  std::int64_t n_val = std::llround(val_frac * static_cast<double>(n));
  n_val = std::max<std::int64_t>(1, std::min<std::int64_t>(n_val, n - 1));

  SplitResult<Ex> out;
  out.val_sentences.assign(ids.begin(), ids.begin() + n_val);
  out.train_sentences.assign(ids.begin() + n_val, ids.end());
  std::sort(out.val_sentences.begin(), out.val_sentences.end());
  std::sort(out.train_sentences.begin(), out.train_sentences.end());
  for (const auto& ex : examples) {
    const bool in_val = std::binary_search(out.val_sentences.begin(), out.val_sentences.end(),
                                           ex.sentence_id);
    (in_val ? out.val : out.train).push_back(ex);
  }
  return out;
}

/// Plain random example-level split (no sentence stratification); keeps the
/// leaky baseline reproducible for ablations.
template <typename Ex>
SplitResult<Ex> random_example_split(const std::vector<Ex>& examples, double val_frac, Rng& rng) {
  if (!(val_frac > 0.0 && val_frac < 1.0))
    throw std::invalid_argument("random_example_split: val_frac outside (0, 1)");
  if (examples.size() < 2)
    throw std::invalid_argument("random_example_split: fewer than 2 examples");
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }
  const auto n = static_cast<std::int64_t>(examples.size());
  std::int64_t n_val = std::llround(val_frac * static_cast<double>(n));
  n_val = std::max<std::int64_t>(1, std::min<std::int64_t>(n_val, n - 1));
  SplitResult<Ex> out;
  for (std::int64_t i = 0; i < n; ++i)
    (i < n_val ? out.val : out.train).push_back(examples[order[static_cast<std::size_t>(i)]]);
  return out;
}

/// Synthetic dataset: every vocabulary word has a deterministic channel-time
/// template; recordings are concatenated per-word templates plus Gaussian
/// noise at the configured SNR (infinite SNR = noiseless).
struct SynthConfig {
  int n_subjects = 4;
  Index channels = 8;
  double fs = 100.0;
  int vocab_size = 30;
  int n_sentences = 40;
  int words_per_sentence = 5;
  double snr = std::numeric_limits<double>::infinity();
  double word_s = 0.48;
  double lead_in_s = 1.0;
  int word_len_min = 3;
  int word_len_max = 5;
};

Dataset synth_generate(const SynthConfig& cfg, std::uint64_t seed);

/// Per-word template pattern used by the generator; unit RMS, deterministic
/// for a given (seed, word index, shape).
SignalMatrixF synth_word_template(std::uint64_t seed, int word_index, Index channels,
                                  Index samples);

}  // namespace eegtext
