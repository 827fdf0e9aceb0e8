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
#include <vector>

#include "eegtext/objectives.hpp"
#include "eegtext/tensor.hpp"

namespace eegtext {

/// Merges adjacent repeats, then removes blanks.
inline std::vector<int> ctc_collapse(const std::vector<int>& frames, int blank = 0) {
  std::vector<int> out;
  int prev = blank;
  for (int f : frames) {
    if (f != prev && f != blank) out.push_back(f);
    prev = f;
  }
  return out;
}

/// Per-frame argmax (ties resolve to the lower index) followed by collapse.
template <typename S>
std::vector<int> ctc_greedy_decode(const Tensor<S>& logits, int blank = 0) {
  if (logits.rank() != 2) throw std::invalid_argument("ctc_greedy_decode: expected [T, A]");
  const Index T = logits.dim(0), A = logits.dim(1);
  const auto X = logits.mat(T, A);
  std::vector<int> frames(static_cast<std::size_t>(T));
  for (Index t = 0; t < T; ++t) {
    Index best = 0;
    for (Index a = 1; a < A; ++a)
      if (X(t, a) > X(t, best)) best = a;
    frames[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return ctc_collapse(frames, blank);
}

struct BeamHypothesis {
  std::vector<int> tokens;
  double log_prob = kLogZero;  // total posterior of the collapsed sequence
};

/// Prefix beam search over the collapsed-sequence posterior. Each surviving
/// prefix tracks blank-terminated and symbol-terminated path mass separately;
/// with a beam at least as wide as the number of reachable prefixes the
/// scores are exact posteriors. Ties in score keep the lexicographically
/// smaller prefix. Results are sorted by descending score.
template <typename S>
std::vector<BeamHypothesis> ctc_beam_decode(const Tensor<S>& logits, Index beam_width,
                                            int blank = 0) {
  if (logits.rank() != 2) throw std::invalid_argument("ctc_beam_decode: expected [T, A]");
  if (beam_width < 1) throw std::invalid_argument("ctc_beam_decode: beam_width < 1");
  if (blank != 0) throw std::invalid_argument("ctc_beam_decode: blank must be index 0");
  const Index T = logits.dim(0), A = logits.dim(1);
  const auto X = logits.mat(T, A);

  struct Mass {
    double blank_end = kLogZero;   // paths ending in blank
    double symbol_end = kLogZero;  // paths ending in the prefix's last symbol
    double total() const { return log_sum_exp(blank_end, symbol_end); }
  };
  using Beam = std::map<std::vector<int>, Mass>;  // ordered => deterministic

  Beam beam;
  beam[{}] = Mass{0.0, kLogZero};

  Eigen::ArrayXd lp(A);
  for (Index t = 0; t < T; ++t) {
    lp = X.row(t).template cast<double>().array();
    const double m = lp.maxCoeff();
    lp -= m + std::log((lp - m).exp().sum());

    Beam next;
    for (const auto& [prefix, mass] : beam) {
      const double total = mass.total();
      // Extend with blank: prefix unchanged, now blank-terminated.
      {
        auto& acc = next[prefix];
        acc.blank_end = log_sum_exp(acc.blank_end, total + lp[blank]);
      }
      // Re-emit the final symbol: prefix unchanged (repeat collapses).
      if (!prefix.empty() && mass.symbol_end != kLogZero) {
        auto& acc = next[prefix];
        acc.symbol_end = log_sum_exp(acc.symbol_end, mass.symbol_end + lp[prefix.back()]);
      }
      // Extend with a new symbol.
      for (int a = 1; a < static_cast<int>(A); ++a) {
        const double src =
            (!prefix.empty() && a == prefix.back()) ? mass.blank_end : total;
        if (src == kLogZero) continue;
        std::vector<int> ext = prefix;
        ext.push_back(a);
        auto& acc = next[ext];
        acc.symbol_end = log_sum_exp(acc.symbol_end, src + lp[a]);
      }
    }

    if (static_cast<Index>(next.size()) > beam_width) {
      std::vector<const typename Beam::value_type*> order;
      order.reserve(next.size());
      for (const auto& kv : next) order.push_back(&kv);
      // Stable on the map's lexicographic order, so equal scores keep the
      // smaller prefix.
      std::stable_sort(order.begin(), order.end(),
                       [](const auto* a, const auto* b) {
                         return a->second.total() > b->second.total();
                       });
      Beam pruned;
      for (Index i = 0; i < beam_width; ++i) pruned.insert(*order[static_cast<std::size_t>(i)]);
      next.swap(pruned);
    }
    beam.swap(next);
  }

  std::vector<BeamHypothesis> out;
  out.reserve(beam.size());
  for (const auto& [prefix, mass] : beam)
    out.push_back(BeamHypothesis{prefix, mass.total()});
  std::stable_sort(out.begin(), out.end(), [](const BeamHypothesis& a, const BeamHypothesis& b) {
    return a.log_prob > b.log_prob;
  });
  return out;
}

/// Best hypothesis from a beam decode.
template <typename S>
std::vector<int> ctc_beam_best(const Tensor<S>& logits, Index beam_width, int blank = 0) {
  return ctc_beam_decode(logits, beam_width, blank).front().tokens;
}

}  // namespace eegtext
