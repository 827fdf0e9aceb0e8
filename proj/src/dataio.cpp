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

#include "eegtext/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace eegtext {

namespace fs = std::filesystem;
using nlohmann::json;

std::string normalize_token(const std::string& raw) {
  std::string kept;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      kept += static_cast<char>(std::tolower(c));
    } else if (ch == '\'' || ch == '-') {
      kept += ch;
    }
  }
  const auto b = kept.find_first_not_of("'-");
  if (b == std::string::npos) return "";
  const auto e = kept.find_last_not_of("'-");
  return kept.substr(b, e - b + 1);
}

std::string normalize_text(const std::string& raw) {
  std::string out;
  bool in_space = false;
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& raw_tokens) {
  Vocabulary v;
  for (const auto& raw : raw_tokens) {
    const std::string tok = normalize_token(raw);
    if (tok.empty() || v.index_.count(tok)) continue;
    v.index_[tok] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocabulary::index_of(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

namespace {

constexpr char kBlankSymbol[] = "<blank>";
constexpr char kSpaceSymbol[] = "<space>";
constexpr char kUnknownSymbol[] = "<unk>";

}  // namespace

Charset Charset::build(const std::string& text, std::size_t max_symbols) {
  Charset cs;
  cs.symbols_.push_back(kBlankSymbol);
  const std::string norm = normalize_text(text);
  for (char ch : norm) {
    if (cs.index_.count(ch)) continue;
    if (cs.symbols_.size() + 1 >= max_symbols)
      throw std::runtime_error("Charset::build: alphabet exceeds max_symbols");
    cs.index_[ch] = static_cast<int>(cs.symbols_.size());
    cs.symbols_.push_back(std::string(1, ch));
  }
  cs.symbols_.push_back(kUnknownSymbol);
  return cs;
}

Charset Charset::full_scale() {
  std::string chars = " abcdefghijklmnopqrstuvwxyz',.?!-;:\"";
  Charset cs;
  cs.symbols_.push_back(kBlankSymbol);
  for (char ch : chars) {
    cs.index_[ch] = static_cast<int>(cs.symbols_.size());
    cs.symbols_.push_back(std::string(1, ch));
  }
  cs.symbols_.push_back(kUnknownSymbol);
  return cs;
}

Charset Charset::from_symbols(const std::vector<std::string>& symbols) {
  if (symbols.size() < 2 || symbols.front() != kBlankSymbol || symbols.back() != kUnknownSymbol)
    throw std::runtime_error("charset symbols must start with <blank> and end with <unk>");
  Charset cs;
  cs.symbols_.push_back(kBlankSymbol);
  for (std::size_t i = 1; i + 1 < symbols.size(); ++i) {
    if (symbols[i].size() != 1)
      throw std::runtime_error("charset symbol " + std::to_string(i + 1) + ": not a single symbol");
    const char ch = symbols[i][0];
    if (cs.index_.count(ch)) throw std::runtime_error("charset contains duplicate symbols");
    cs.index_[ch] = static_cast<int>(cs.symbols_.size());
    cs.symbols_.push_back(symbols[i]);
  }
  cs.symbols_.push_back(kUnknownSymbol);
  return cs;
}

int Charset::index_of(char c) const {
  const auto it = index_.find(c);
  return it == index_.end() ? unknown() : it->second;
}

std::vector<int> Charset::encode(const std::string& text) const {
  const std::string norm = normalize_text(text);
  std::vector<int> out;
  out.reserve(norm.size());
  for (char ch : norm) out.push_back(index_of(ch));
  return out;
}

std::string Charset::decode(const std::vector<int>& tokens) const {
  std::string out;
  for (int t : tokens) {
    if (t < 0 || t >= static_cast<int>(symbols_.size()))
      throw std::invalid_argument("Charset::decode: token out of range");
    if (t == blank()) continue;
    out += symbols_[static_cast<std::size_t>(t)];
  }
  return out;
}

std::string sentence_text(const EventTable& events, int sentence_id) {
  std::vector<const EventRow*> rows;
  for (const auto& ev : events)
    if (ev.sentence_id == sentence_id) rows.push_back(&ev);
  std::sort(rows.begin(), rows.end(),
            [](const EventRow* a, const EventRow* b) { return a->word_index < b->word_index; });
  std::string out;
  for (const auto* row : rows) {
    const std::string tok = normalize_token(row->word);
    if (tok.empty()) continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::vector<int> sentence_ids(const EventTable& events) {
  std::vector<int> ids;
  for (const auto& ev : events) ids.push_back(ev.sentence_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::map<std::string, std::int64_t> word_frequency(const std::vector<std::string>& tokens) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& tok : tokens) ++counts[tok];
  return counts;
}

namespace {

void write_events_tsv(const fs::path& path, const EventTable& events) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "word\tonset_s\toffset_s\tsentence_id\tword_index\n";
  char buf[64];
  for (const auto& ev : events) {
    out << ev.word << '\t';
    std::snprintf(buf, sizeof(buf), "%.17g", ev.onset_s);
    out << buf << '\t';
    std::snprintf(buf, sizeof(buf), "%.17g", ev.offset_s);
    out << buf << '\t' << ev.sentence_id << '\t' << ev.word_index << '\n';
  }
}

EventTable read_events_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing events file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty events file: " + path.string());
  if (line != "word\tonset_s\toffset_s\tsentence_id\tword_index")
    throw std::runtime_error("events header mismatch in " + path.string());
  EventTable events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 5)
      throw std::runtime_error("events row " + std::to_string(lineno) + ": expected 5 columns");
    EventRow ev;
    ev.word = cols[0];
    try {
      ev.onset_s = std::stod(cols[1]);
      ev.offset_s = std::stod(cols[2]);
      ev.sentence_id = std::stoi(cols[3]);
      ev.word_index = std::stoi(cols[4]);
    } catch (const std::exception&) {
      throw std::runtime_error("events row " + std::to_string(lineno) + ": unparseable field");
    }
    events.push_back(std::move(ev));
  }
  return events;
}

void validate_events(const EventTable& events, double max_duration_s) {
  double prev_onset = -1.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    const std::string where = "event " + std::to_string(i);
    if (!(ev.onset_s >= 0.0)) throw std::runtime_error(where + ": negative onset");
    if (!(ev.offset_s > ev.onset_s)) throw std::runtime_error(where + ": offset not after onset");
    if (ev.onset_s < prev_onset) throw std::runtime_error(where + ": onsets not sorted");
    if (ev.onset_s >= max_duration_s)
      throw std::runtime_error(where + ": onset beyond recording end");
    prev_onset = ev.onset_s;
  }
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& line : lines) out << line << '\n';
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> charset_to_lines(const Charset& cs) {
  std::vector<std::string> lines;
  for (const auto& sym : cs.symbols()) {
    if (sym == " ")
      lines.push_back(kSpaceSymbol);
    else
      lines.push_back(sym);
  }
  return lines;
}

Charset charset_from_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> symbols;
  symbols.reserve(lines.size());
  for (const auto& line : lines) symbols.push_back(line == kSpaceSymbol ? " " : line);
  return Charset::from_symbols(symbols);
}

void write_f32(const fs::path& path, const SignalMatrixF& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  static_assert(sizeof(float) == 4, "float32 storage requires 4-byte float");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(sizeof(float)) * data.size());
  if (!out) throw std::runtime_error("short write: " + path.string());
}

SignalMatrixF read_f32(const fs::path& path, Index channels, Index samples) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing signal file: " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::int64_t>(in.tellg());
  const std::int64_t want = static_cast<std::int64_t>(channels) * samples * 4;
  if (bytes != want)
    throw std::runtime_error("shape mismatch in " + path.string() + ": expected " +
                             std::to_string(want) + " bytes, found " + std::to_string(bytes));
  in.seekg(0, std::ios::beg);
  SignalMatrixF data(channels, samples);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(sizeof(float)) * data.size());
  if (!in) throw std::runtime_error("short read: " + path.string());
  return data;
}

}  // namespace

void save_dataset(const std::string& dir, const Dataset& ds) {
  const fs::path root(dir);
  fs::create_directories(root);

  json manifest;
  manifest["format"] = "eegtext-dataset";
  manifest["version"] = 1;
  manifest["fs"] = ds.fs;
  manifest["channels"] = ds.channels;
  if (!ds.track.empty()) manifest["track"] = ds.track;
  manifest["events"] = "events.tsv";
  manifest["vocab"] = "vocab.txt";
  manifest["charset"] = "charset.txt";
  json subjects = json::array();
  for (const auto& rec : ds.recordings) {
    if (rec.data.rows() != ds.channels)
      throw std::invalid_argument("save_dataset: recording channel count mismatch for subject " +
                                  rec.subject_id);
    const std::string rel = rec.subject_id + "/eeg.f32";
    fs::create_directories(root / rec.subject_id);
    write_f32(root / rel, rec.data);
    subjects.push_back({{"id", rec.subject_id}, {"eeg", rel}, {"samples", rec.data.cols()}});
  }
  manifest["subjects"] = subjects;

  std::ofstream mf(root / "manifest.json");
  if (!mf) throw std::runtime_error("cannot open for writing: " + (root / "manifest.json").string());
  mf << manifest.dump(2) << '\n';

  write_events_tsv(root / "events.tsv", ds.events);
  write_lines(root / "vocab.txt", ds.vocab.tokens());
  write_lines(root / "charset.txt", charset_to_lines(ds.charset));
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const fs::path mpath = root / "manifest.json";
  std::ifstream mf(mpath);
  if (!mf) throw std::runtime_error("missing manifest: " + mpath.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest parse error in " + mpath.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "eegtext-dataset")
    throw std::runtime_error("manifest format field is not eegtext-dataset");

  Dataset ds;
  ds.fs = manifest.value("fs", 0.0);
  ds.channels = manifest.value("channels", Index{0});
  ds.track = manifest.value("track", "");
  if (!(ds.fs > 0.0)) throw std::runtime_error("manifest fs must be positive");
  if (ds.channels <= 0) throw std::runtime_error("manifest channels must be positive");

  if (!manifest.contains("subjects") || !manifest["subjects"].is_array() ||
      manifest["subjects"].empty())
    throw std::runtime_error("manifest subjects array missing or empty");

  double min_duration = std::numeric_limits<double>::infinity();
  for (const auto& sub : manifest["subjects"]) {
    Recording<float> rec;
    rec.subject_id = sub.value("id", "");
    rec.fs = ds.fs;
    if (rec.subject_id.empty()) throw std::runtime_error("manifest subject missing id");
    const std::string rel = sub.value("eeg", "");
    const auto samples = sub.value("samples", Index{-1});
    if (rel.empty() || samples < 0)
      throw std::runtime_error("manifest subject " + rec.subject_id + " missing eeg/samples");
    rec.data = read_f32(root / rel, ds.channels, samples);
    min_duration = std::min(min_duration, static_cast<double>(samples) / ds.fs);
    ds.recordings.push_back(std::move(rec));
  }

  ds.events = read_events_tsv(root / manifest.value("events", "events.tsv"));
  validate_events(ds.events, min_duration);

  std::vector<std::string> vocab_lines = read_lines(root / manifest.value("vocab", "vocab.txt"));
  ds.vocab = Vocabulary::build(vocab_lines);
  if (ds.vocab.size() != static_cast<Index>(vocab_lines.size()))
    throw std::runtime_error("vocab.txt contains duplicate or empty tokens");

  ds.charset = charset_from_lines(read_lines(root / manifest.value("charset", "charset.txt")));

  for (int sid : sentence_ids(ds.events)) {
    while (static_cast<int>(ds.sentences.size()) < sid) ds.sentences.emplace_back();
    ds.sentences.push_back(sentence_text(ds.events, sid));
  }
  for (const auto& s : ds.sentences) {
    if (!ds.text.empty()) ds.text += '\n';
    ds.text += s;
  }
  return ds;
}

WordSlices slice_word_windows(const SignalMatrixF& eeg, double fs, const std::string& subject_id,
                              const EventTable& events, const Vocabulary& vocab,
                              Index window_samples) {
  if (window_samples < 4 || window_samples % 4 != 0)
    throw std::invalid_argument("slice_word_windows: window_samples must be a multiple of 4");
  WordSlices out;
  const Index T = eeg.cols();
  for (const auto& ev : events) {
    const std::string tok = normalize_token(ev.word);
    const int label = vocab.index_of(tok);
    if (label < 0)
      throw std::runtime_error("slice_word_windows: word not in vocabulary: " + ev.word);
    const Index start = static_cast<Index>(std::llround(ev.onset_s * fs));
    if (start < 0 || start >= T)
      throw std::runtime_error("slice_word_windows: event onset outside recording");
    WordExample ex;
    ex.window = SignalMatrixF::Zero(eeg.rows(), window_samples);
    const Index avail = std::min(window_samples, T - start);
    ex.window.leftCols(avail) = eeg.middleCols(start, avail);
    if (avail < window_samples) ++out.overruns;
    ex.label = label;
    ex.sentence_id = ev.sentence_id;
    ex.subject_id = subject_id;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

std::vector<SentenceExample> slice_sentence_windows(const SignalMatrixF& eeg, double fs,
                                                    const std::string& subject_id,
                                                    const EventTable& events,
                                                    const Charset& charset,
                                                    Index window_samples) {
  if (window_samples < 4 || window_samples % 4 != 0)
    throw std::invalid_argument("slice_sentence_windows: window_samples must be a multiple of 4");
  std::vector<SentenceExample> out;
  const Index T = eeg.cols();
  const Index frames = window_samples / 4;
  for (int sid : sentence_ids(events)) {
    double onset = std::numeric_limits<double>::infinity();
    for (const auto& ev : events)
      if (ev.sentence_id == sid) onset = std::min(onset, ev.onset_s);
    SentenceExample ex;
    ex.sentence_id = sid;
    ex.subject_id = subject_id;
    ex.text = sentence_text(events, sid);
    if (ex.text.empty())
      throw std::runtime_error("slice_sentence_windows: sentence " + std::to_string(sid) +
                               " has empty text");
    ex.target = charset.encode(ex.text);

    Index min_frames = static_cast<Index>(ex.target.size());
    for (std::size_t i = 1; i < ex.target.size(); ++i)
      if (ex.target[i] == ex.target[i - 1]) ++min_frames;
    if (min_frames > frames)
      throw std::runtime_error("slice_sentence_windows: sentence " + std::to_string(sid) +
                               " target needs " + std::to_string(min_frames) +
                               " frames but the window provides " + std::to_string(frames));

    const Index start = static_cast<Index>(std::llround(onset * fs));
    if (start < 0 || start >= T)
      throw std::runtime_error("slice_sentence_windows: sentence onset outside recording");
    ex.window = SignalMatrixF::Zero(eeg.rows(), window_samples);
    const Index avail = std::min(window_samples, T - start);
    ex.window.leftCols(avail) = eeg.middleCols(start, avail);
    out.push_back(std::move(ex));
  }
  return out;
}

SignalMatrixF synth_word_template(std::uint64_t seed, int word_index, Index channels,
                                  Index samples) {
  // Independent stream per word so templates do not depend on draw order.
  Rng rng(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(word_index + 1)));
  SignalMatrixF tpl(channels, samples);
  double sumsq = 0.0;
  for (Index c = 0; c < channels; ++c)
    for (Index t = 0; t < samples; ++t) {
      const double v = rng.normal(0.0, 1.0);
      tpl(c, t) = static_cast<float>(v);
      sumsq += v * v;
    }
  const double rms = std::sqrt(sumsq / static_cast<double>(channels * samples));
  if (rms > 0.0) tpl /= static_cast<float>(rms);
  return tpl;
}

Dataset synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.n_subjects < 1 || cfg.channels < 3 || !(cfg.fs > 0.0) || cfg.vocab_size < 2 ||
      cfg.n_sentences < 2 || cfg.words_per_sentence < 1 || !(cfg.word_s > 0.0) ||
      !(cfg.lead_in_s >= 0.0) || cfg.word_len_min < 1 || cfg.word_len_max < cfg.word_len_min)
    throw std::invalid_argument("synth_generate: invalid config");
  if (!(cfg.snr > 0.0)) throw std::invalid_argument("synth_generate: snr must be positive");

  Rng rng(seed);

  // Unique pseudo-words.
  std::vector<std::string> words;
  std::set<std::string> seen;
  while (static_cast<int>(words.size()) < cfg.vocab_size) {
    const auto len = rng.uniform_int(cfg.word_len_min, cfg.word_len_max);
    std::string w;
    for (std::int64_t i = 0; i < len; ++i)
      w += static_cast<char>('a' + rng.uniform_int(0, 25));
    if (seen.insert(w).second) words.push_back(w);
  }

  const Index L = static_cast<Index>(std::llround(cfg.word_s * cfg.fs));
  if (L < 1) throw std::invalid_argument("synth_generate: word_s too short for fs");
  std::vector<SignalMatrixF> templates;
  for (int w = 0; w < cfg.vocab_size; ++w)
    templates.push_back(synth_word_template(seed, w, cfg.channels, L));

  // Shared sentence plan across subjects.
  std::vector<std::vector<int>> plan(static_cast<std::size_t>(cfg.n_sentences));
  for (auto& sent : plan) {
    sent.resize(static_cast<std::size_t>(cfg.words_per_sentence));
    for (auto& w : sent) w = static_cast<int>(rng.uniform_int(0, cfg.vocab_size - 1));
  }

  const Index lead = static_cast<Index>(std::llround(cfg.lead_in_s * cfg.fs));
  const Index total = lead + static_cast<Index>(cfg.n_sentences) * cfg.words_per_sentence * L;
  const double noise_sd =
      std::isinf(cfg.snr) ? 0.0 : std::sqrt(1.0 / cfg.snr);  // templates have unit RMS

  Dataset ds;
  ds.fs = cfg.fs;
  ds.channels = cfg.channels;

  for (int s = 0; s < cfg.n_subjects; ++s) {
    Recording<float> rec;
    char sid[16];
    std::snprintf(sid, sizeof(sid), "s%02d", s);
    rec.subject_id = sid;
    rec.fs = cfg.fs;
    rec.data = SignalMatrixF::Zero(cfg.channels, total);
    Index pos = lead;
    for (const auto& sent : plan) {
      for (int w : sent) {
        rec.data.middleCols(pos, L) = templates[static_cast<std::size_t>(w)];
        pos += L;
      }
    }
    if (noise_sd > 0.0) {
      for (Index c = 0; c < cfg.channels; ++c)
        for (Index t = 0; t < total; ++t)
          rec.data(c, t) += static_cast<float>(rng.normal(0.0, noise_sd));
    }
    ds.recordings.push_back(std::move(rec));
  }

  int word_counter = 0;
  for (int sid = 0; sid < cfg.n_sentences; ++sid) {
    for (int wi = 0; wi < cfg.words_per_sentence; ++wi) {
      EventRow ev;
      ev.word = words[static_cast<std::size_t>(plan[static_cast<std::size_t>(sid)]
                                                   [static_cast<std::size_t>(wi)])];
      const Index start = lead + (static_cast<Index>(sid) * cfg.words_per_sentence + wi) * L;
      ev.onset_s = static_cast<double>(start) / cfg.fs;
      ev.offset_s = static_cast<double>(start + L) / cfg.fs;
      ev.sentence_id = sid;
      ev.word_index = word_counter++;
      ds.events.push_back(std::move(ev));
    }
  }

  std::vector<std::string> event_words;
  for (const auto& ev : ds.events) event_words.push_back(ev.word);
  ds.vocab = Vocabulary::build(event_words);

  for (int sid : sentence_ids(ds.events)) ds.sentences.push_back(sentence_text(ds.events, sid));
  for (const auto& s : ds.sentences) {
    if (!ds.text.empty()) ds.text += '\n';
    ds.text += s;
  }
  ds.charset = Charset::build(ds.text);
  return ds;
}

}  // namespace eegtext
