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

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "eegtext/common.hpp"

namespace eegtext {

/// One subject's multichannel EEG plus sampling metadata.
template <typename S>
struct Recording {
  SignalMatrix<S> data;  // [channels, samples]
  double fs = 0.0;       // Hz
  std::string subject_id;

  Index channels() const { return data.rows(); }
  Index samples() const { return data.cols(); }
};

/// Minimally processed signal track: channel removal, baseline correction,
/// robust scaling, outlier handling, standardization.
template <typename S>
struct EegRaw {
  SignalMatrix<S> data;  // [channels, samples]
  double fs = 0.0;
};

/// Feature-enhanced track: per channel, a fixed set of sliding-window feature
/// streams stacked channel-major, so data has channels * features rows.
template <typename S>
struct EegFeats {
  SignalMatrix<S> data;  // [channels * features, samples]
  Index features_per_channel = 0;
  double fs = 0.0;
};

template <typename S>
void validate_recording(const Recording<S>& rec) {
  if (!(rec.fs > 0.0)) throw std::invalid_argument("recording: fs must be positive");
  if (rec.channels() < 3)
    throw std::invalid_argument("recording: needs at least 3 channels");
  if (!rec.data.allFinite())
    throw std::invalid_argument("recording: non-finite sample in " + rec.subject_id);
}

/// Linear-interpolation percentile of a channel (the numpy default).
template <typename S>
S percentile(const Eigen::Ref<const Eigen::Matrix<S, Eigen::Dynamic, 1>>& values, double p) {
  if (values.size() == 0) throw std::invalid_argument("percentile: empty input");
  std::vector<S> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return static_cast<S>(v[lo] + frac * (v[lo + 1] - v[lo]));
}

template <typename S>
Recording<S> drop_channels(const Recording<S>& rec, Index n_last) {
  if (n_last < 0 || n_last >= rec.channels())
    throw std::invalid_argument("drop_channels: would remove all channels");
  Recording<S> out;
  out.data = rec.data.topRows(rec.channels() - n_last);
  out.fs = rec.fs;
  out.subject_id = rec.subject_id;
  return out;
}

/// Subtracts the mean of the first `baseline_s` seconds per channel.
template <typename S>
SignalMatrix<S> baseline_correct(const SignalMatrix<S>& x, double fs, double baseline_s = 0.5) {
  const Index n = static_cast<Index>(std::ceil(baseline_s * fs));
  if (n < 1) throw std::invalid_argument("baseline_correct: window is empty");
  if (n > x.cols()) throw std::invalid_argument("baseline_correct: window longer than signal");
  SignalMatrix<S> out = x;
  for (Index c = 0; c < x.rows(); ++c) {
    const S mean = x.row(c).head(n).mean();
    out.row(c).array() -= mean;
  }
  return out;
}

/// Per channel: subtract the median, divide by the interquartile range.
/// A flat channel has zero IQR; the divisor falls back to 1.
template <typename S>
SignalMatrix<S> robust_scale(const SignalMatrix<S>& x) {
  if (x.cols() < 2) throw std::invalid_argument("robust_scale: needs at least 2 samples");
  SignalMatrix<S> out(x.rows(), x.cols());
  for (Index c = 0; c < x.rows(); ++c) {
    const Eigen::Matrix<S, Eigen::Dynamic, 1> row = x.row(c).transpose();
    const S med = percentile<S>(row, 50.0);
    const S iqr = percentile<S>(row, 75.0) - percentile<S>(row, 25.0);
    const S div = (iqr == S(0)) ? S(1) : iqr;
    out.row(c) = (x.row(c).array() - med) / div;
  }
  return out;
}

/// Per channel: clip to the [p_lo, p_hi] percentile range, then clamp anything
/// farther than sd_limit standard deviations from the clipped mean.
template <typename S>
SignalMatrix<S> clip_and_clamp(const SignalMatrix<S>& x, double p_lo = 5.0, double p_hi = 95.0,
                               double sd_limit = 20.0) {
  if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 100.0))
    throw std::invalid_argument("clip_and_clamp: need 0 <= p_lo < p_hi <= 100");
  SignalMatrix<S> out(x.rows(), x.cols());
  for (Index c = 0; c < x.rows(); ++c) {
    const Eigen::Matrix<S, Eigen::Dynamic, 1> row = x.row(c).transpose();
    const S lo = percentile<S>(row, p_lo);
    const S hi = percentile<S>(row, p_hi);
    auto clipped = x.row(c).array().max(lo).min(hi);
    const S mean = clipped.mean();
    const S var = (clipped - mean).square().mean();
    const S sd = std::sqrt(var);
    const S bound = static_cast<S>(sd_limit) * sd;
    out.row(c) = clipped.max(mean - bound).min(mean + bound);
  }
  return out;
}

/// Per channel zero-mean, unit-variance normalization (population variance).
/// Zero-variance channels divide by 1 instead.
template <typename S>
SignalMatrix<S> standardize(const SignalMatrix<S>& x) {
  if (x.cols() < 2) throw std::invalid_argument("standardize: needs at least 2 samples");
  SignalMatrix<S> out(x.rows(), x.cols());
  for (Index c = 0; c < x.rows(); ++c) {
    const S mean = x.row(c).mean();
    const S var = (x.row(c).array() - mean).square().mean();
    const S sd = std::sqrt(var);
    const S div = (sd == S(0)) ? S(1) : sd;
    out.row(c) = (x.row(c).array() - mean) / div;
  }
  return out;
}

struct RawTrackOptions {
  Index drop_last_channels = 2;
  double baseline_s = 0.5;
  double clip_p_lo = 5.0;
  double clip_p_hi = 95.0;
  double sd_limit = 20.0;
};

/// The minimal pipeline: channel removal -> baseline correction ->
/// robust scaling -> percentile clip + sd clamp -> standardization.
template <typename S>
EegRaw<S> preprocess_raw(const Recording<S>& rec, const RawTrackOptions& opt = {}) {
  validate_recording(rec);
  Recording<S> kept = drop_channels(rec, opt.drop_last_channels);
  SignalMatrix<S> x = baseline_correct(kept.data, kept.fs, opt.baseline_s);
  x = robust_scale(x);
  x = clip_and_clamp(x, opt.clip_p_lo, opt.clip_p_hi, opt.sd_limit);
  x = standardize(x);
  return EegRaw<S>{std::move(x), rec.fs};
}

/// Shifts every channel left by round(shift_s * fs) samples, zero-padding the
/// tail so the length is preserved.
template <typename S>
SignalMatrix<S> temporal_shift(const SignalMatrix<S>& x, double fs, double shift_s = 0.150) {
  const Index k = static_cast<Index>(std::llround(shift_s * fs));
  if (k < 0) throw std::invalid_argument("temporal_shift: negative shift");
  if (k >= x.cols() && k != 0)
    throw std::invalid_argument("temporal_shift: shift exceeds signal length");
  SignalMatrix<S> out = SignalMatrix<S>::Zero(x.rows(), x.cols());
  if (k < x.cols()) out.leftCols(x.cols() - k) = x.rightCols(x.cols() - k);
  return out;
}

namespace detail {

// Symmetric (mirror-with-edge) index fold into [0, n).
inline Index reflect_index(Index i, Index n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace detail

struct FeatureOptions {
  double window_s = 0.050;  // sliding window length in seconds, forced odd
};

/// Five per-sample feature streams per channel, computed over a centered
/// sliding window with symmetric edge padding:
///   0: double moving average
///   1: RMS of single-level Haar detail coefficients within the window
///   2: RMS of the rectified signal
///   3: zero-crossing rate (sign(0) treated as positive)
///   4: mean of the rectified signal
/// Output rows are stacked channel-major: row = channel * 5 + stream.
template <typename S>
EegFeats<S> extract_features(const EegRaw<S>& in, const FeatureOptions& opt = {}) {
  constexpr Index kStreams = 5;
  const Index t_len = in.data.cols();
  const Index channels = in.data.rows();
  Index w = std::max<Index>(1, static_cast<Index>(std::llround(opt.window_s * in.fs)));
  if (w % 2 == 0) ++w;
  if (t_len < w) throw std::invalid_argument("extract_features: signal shorter than window");
  const Index h = w / 2;

  EegFeats<S> out;
  out.features_per_channel = kStreams;
  out.fs = in.fs;
  out.data.resize(channels * kStreams, t_len);

  // Padded domain covers [-2h, T-1+2h]; the second moving-average pass reads
  // the first one at +-h around each output sample.
  const Index pad = 2 * h;
  const Index n = t_len + 2 * pad;
  std::vector<double> p(n);
  for (Index c = 0; c < channels; ++c) {
    for (Index i = 0; i < n; ++i)
      p[i] = static_cast<double>(in.data(c, detail::reflect_index(i - pad, t_len)));

    // prefix sums over the padded signal
    std::vector<double> ps(n + 1, 0.0), ps2(n + 1, 0.0), pabs(n + 1, 0.0);
    for (Index i = 0; i < n; ++i) {
      ps[i + 1] = ps[i] + p[i];
      ps2[i + 1] = ps2[i] + p[i] * p[i];
      pabs[i + 1] = pabs[i] + std::abs(p[i]);
    }
    // sign changes between adjacent samples, and squared Haar details for
    // pairs starting at each position (split by parity for O(1) window sums)
    std::vector<double> zc(n, 0.0), dsq(n, 0.0);
    for (Index i = 0; i + 1 < n; ++i) {
      const bool s0 = p[i] >= 0.0, s1 = p[i + 1] >= 0.0;
      zc[i] = (s0 != s1) ? 1.0 : 0.0;
      const double d = (p[i] - p[i + 1]) / std::sqrt(2.0);
      dsq[i] = d * d;
    }
    std::vector<double> zcs(n + 1, 0.0);
    std::vector<double> deven(n + 1, 0.0), dodd(n + 1, 0.0);
    for (Index i = 0; i < n; ++i) {
      zcs[i + 1] = zcs[i] + zc[i];
      deven[i + 1] = deven[i] + (i % 2 == 0 ? dsq[i] : 0.0);
      dodd[i + 1] = dodd[i] + (i % 2 == 1 ? dsq[i] : 0.0);
    }

    // first moving average on the extended domain [-h, T-1+h]
    const Index m = t_len + 2 * h;
    std::vector<double> ma(m);
    for (Index j = 0; j < m; ++j) {
      const Index a = j + pad - h - h;  // window start in padded coords
      ma[j] = (ps[a + w] - ps[a]) / w;
    }
    std::vector<double> mas(m + 1, 0.0);
    for (Index j = 0; j < m; ++j) mas[j + 1] = mas[j] + ma[j];

    const Index pairs = (w - 1) / 2;
    for (Index t = 0; t < t_len; ++t) {
      const Index a = t + pad - h;  // window start in padded coords
      // stream 0: average of the first moving average over the same window
      out.data(c * kStreams + 0, t) = static_cast<S>((mas[t + w] - mas[t]) / w);
      // stream 1: RMS of Haar details over non-overlapping pairs in-window
      double dsum = 0.0;
      if (pairs > 0) {
        const auto& pref = (a % 2 == 0) ? deven : dodd;
        // pair starts a, a+2, ..., a+2*(pairs-1); strided sums via parity class
        dsum = pref[a + 2 * pairs - 1] - pref[a];
        // the prefix over one parity class between [a, a+2*pairs-1) covers
        // exactly the pair starts of matching parity
      }
      out.data(c * kStreams + 1, t) =
          pairs > 0 ? static_cast<S>(std::sqrt(dsum / pairs)) : S(0);
      // stream 2: RMS of |x| over the window (= RMS of x)
      out.data(c * kStreams + 2, t) = static_cast<S>(std::sqrt((ps2[a + w] - ps2[a]) / w));
      // stream 3: zero-crossing rate over the w-1 adjacent pairs
      out.data(c * kStreams + 3, t) =
          w > 1 ? static_cast<S>((zcs[a + w - 1] - zcs[a]) / (w - 1)) : S(0);
      // stream 4: mean of |x|
      out.data(c * kStreams + 4, t) = static_cast<S>((pabs[a + w] - pabs[a]) / w);
    }
  }
  return out;
}

/// Zeroes n_masks contiguous time spans across all channels. Each span width
/// is drawn uniformly from [0, max_width_frac * T].
template <typename S>
SignalMatrix<S> time_mask(const SignalMatrix<S>& x, double max_width_frac, int n_masks, Rng& rng) {
  if (!(max_width_frac >= 0.0 && max_width_frac <= 1.0))
    throw std::invalid_argument("time_mask: max_width_frac outside [0, 1]");
  SignalMatrix<S> out = x;
  const Index t_len = x.cols();
  const auto w_max = static_cast<Index>(std::floor(max_width_frac * static_cast<double>(t_len)));
  for (int k = 0; k < n_masks; ++k) {
    const Index width = rng.uniform_int(0, w_max);
    if (width == 0) continue;
    const Index start = rng.uniform_int(0, t_len - width);
    out.middleCols(start, width).setZero();
  }
  return out;
}

/// Per channel FFT, zero n_masks contiguous frequency bands (band positions
/// shared across channels), inverse FFT back. Bands cover at most
/// max_band_frac of the one-sided spectrum each.
template <typename S>
SignalMatrix<S> freq_mask(const SignalMatrix<S>& x, double max_band_frac, int n_masks, Rng& rng) {
  if (!(max_band_frac >= 0.0 && max_band_frac <= 1.0))
    throw std::invalid_argument("freq_mask: max_band_frac outside [0, 1]");
  const Index t_len = x.cols();
  const Index n_bins = t_len / 2 + 1;
  const auto b_max = static_cast<Index>(std::floor(max_band_frac * static_cast<double>(n_bins)));

  std::vector<std::pair<Index, Index>> bands;  // [start, start+width)
  for (int k = 0; k < n_masks; ++k) {
    const Index width = rng.uniform_int(0, b_max);
    if (width == 0) continue;
    const Index start = rng.uniform_int(0, n_bins - width);
    bands.emplace_back(start, start + width);
  }
  if (bands.empty()) return x;

  SignalMatrix<S> out(x.rows(), x.cols());
  Eigen::FFT<double> fft;
  std::vector<double> signal(t_len);
  std::vector<std::complex<double>> spec;
  for (Index c = 0; c < x.rows(); ++c) {
    for (Index t = 0; t < t_len; ++t) signal[t] = static_cast<double>(x(c, t));
    fft.fwd(spec, signal);
    for (const auto& [lo, hi] : bands) {
      for (Index b = lo; b < hi; ++b) {
        spec[b] = 0.0;
        if (b != 0) spec[(t_len - b) % t_len] = 0.0;  // conjugate mirror
      }
    }
    fft.inv(signal, spec);
    for (Index t = 0; t < t_len; ++t) out(c, t) = static_cast<S>(signal[t]);
  }
  return out;
}

}  // namespace eegtext
