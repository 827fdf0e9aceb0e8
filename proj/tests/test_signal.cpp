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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "eegtext/signal.hpp"
#include "testutil.hpp"

using namespace eegtext;
using eegtext::testing::random_signal;

namespace {

SignalMatrix<double> row(std::initializer_list<double> vals) {
  SignalMatrix<double> x(1, static_cast<Index>(vals.size()));
  Index i = 0;
  for (double v : vals) x(0, i++) = v;
  return x;
}

}  // namespace

TEST_CASE("percentile matches linear interpolation") {
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  CHECK(percentile<double>(v, 25) == doctest::Approx(1.75));
  CHECK(percentile<double>(v, 50) == doctest::Approx(2.5));
  CHECK(percentile<double>(v, 75) == doctest::Approx(3.25));
  CHECK(percentile<double>(v, 0) == doctest::Approx(1.0));
  CHECK(percentile<double>(v, 100) == doctest::Approx(4.0));

  Eigen::VectorXd u(10);
  u << 0, 0, 0, 0, 0, 0, 0, 0, 0, 100;
  CHECK(percentile<double>(u, 95) == doctest::Approx(55.0));

  Eigen::VectorXd single(1);
  single << 7;
  CHECK(percentile<double>(single, 40) == doctest::Approx(7.0));

  Eigen::VectorXd empty(0);
  CHECK_THROWS_AS(percentile<double>(empty, 50), std::invalid_argument);
}

TEST_CASE("percentile is permutation invariant") {
  Rng rng(11);
  Eigen::VectorXd v(17);
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal(0, 3);
  Eigen::VectorXd shuffled = v;
  std::shuffle(shuffled.data(), shuffled.data() + shuffled.size(), rng.engine());
  for (double p : {5.0, 25.0, 50.0, 75.0, 95.0})
    CHECK(percentile<double>(v, p) == doctest::Approx(percentile<double>(shuffled, p)));
}

TEST_CASE("validate_recording rejects bad inputs") {
  Rng rng(1);
  Recording<double> rec;
  rec.fs = 100.0;
  rec.data = random_signal(4, 50, rng);
  CHECK_NOTHROW(validate_recording(rec));

  Recording<double> bad_fs = rec;
  bad_fs.fs = 0.0;
  CHECK_THROWS_AS(validate_recording(bad_fs), std::invalid_argument);

  Recording<double> few = rec;
  few.data = rec.data.topRows(2);
  CHECK_THROWS_AS(validate_recording(few), std::invalid_argument);

  Recording<double> nan = rec;
  nan.data(1, 3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate_recording(nan), std::invalid_argument);
}

TEST_CASE("drop_channels removes trailing rows") {
  Recording<double> rec;
  rec.fs = 10;
  rec.data = row({1, 2, 3});
  rec.data.conservativeResize(3, 3);
  rec.data.row(1) << 4, 5, 6;
  rec.data.row(2) << 7, 8, 9;
  const auto kept = drop_channels(rec, 2);
  CHECK(kept.channels() == 1);
  CHECK(kept.data(0, 2) == 3);
  CHECK_THROWS_AS(drop_channels(rec, 3), std::invalid_argument);
}

TEST_CASE("baseline_correct subtracts the early-window mean") {
  // fs=4 and 0.5 s -> ceil(2) = 2 baseline samples, mean (1+3)/2 = 2.
  const auto x = row({1, 3, 2, 2});
  const auto y = baseline_correct(x, 4.0, 0.5);
  CHECK(y(0, 0) == doctest::Approx(-1));
  CHECK(y(0, 1) == doctest::Approx(1));
  CHECK(y(0, 2) == doctest::Approx(0));
  CHECK(y(0, 3) == doctest::Approx(0));
  CHECK_THROWS_AS(baseline_correct(x, 4.0, 2.0), std::invalid_argument);
}

TEST_CASE("robust_scale centers on the median and divides by the IQR") {
  const auto y = robust_scale(row({1, 2, 3, 4}));
  CHECK(y(0, 0) == doctest::Approx(-1.0));
  CHECK(y(0, 1) == doctest::Approx(-1.0 / 3));
  CHECK(y(0, 2) == doctest::Approx(1.0 / 3));
  CHECK(y(0, 3) == doctest::Approx(1.0));

  // Flat channels divide by 1 instead of 0.
  const auto flat = robust_scale(row({5, 5, 5, 5}));
  CHECK(flat(0, 0) == doctest::Approx(0.0));
  CHECK(flat(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("robust_scale is invariant to positive affine maps") {
  Rng rng(7);
  const auto x = random_signal(3, 101, rng, 2.0);
  const SignalMatrix<double> ax = (x.array() * 3.5 + 11.0).matrix();
  const auto y = robust_scale(x);
  const auto ay = robust_scale(ax);
  CHECK((y - ay).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("clip_and_clamp bounds extremes to the percentile range") {
  const auto y = clip_and_clamp(row({0, 0, 0, 0, 0, 0, 0, 0, 0, 100}), 5, 95, 20);
  for (Index t = 0; t < 9; ++t) CHECK(y(0, t) == doctest::Approx(0.0));
  CHECK(y(0, 9) == doctest::Approx(55.0));

  // Within-range data is untouched.
  Rng rng(3);
  const auto x = random_signal(2, 200, rng);
  const auto z = clip_and_clamp(x, 0, 100, 1e9);
  CHECK((z - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standardize gives zero mean and unit population variance") {
  const auto y = standardize(row({1, 3}));
  CHECK(y(0, 0) == doctest::Approx(-1.0));
  CHECK(y(0, 1) == doctest::Approx(1.0));

  Rng rng(5);
  const auto x = random_signal(4, 313, rng, 3.0);
  const auto z = standardize(x);
  for (Index c = 0; c < z.rows(); ++c) {
    const double mean = z.row(c).mean();
    const double var = (z.row(c).array() - mean).square().mean();
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }

  // Flat channel: divisor falls back to 1, output is exactly zero.
  const auto flat = standardize(row({2, 2, 2}));
  CHECK(flat.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("standardize is idempotent") {
  Rng rng(9);
  const auto x = random_signal(3, 257, rng, 5.0);
  const auto once = standardize(x);
  const auto twice = standardize(once);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("preprocess_raw output satisfies the track invariants") {
  Rng rng(13);
  Recording<double> rec;
  rec.fs = 100.0;
  rec.subject_id = "s00";
  rec.data = random_signal(8, 400, rng, 7.0);
  const auto raw = preprocess_raw(rec);
  CHECK(raw.data.rows() == 6);  // two trailing channels dropped
  CHECK(raw.data.cols() == 400);
  CHECK(raw.fs == 100.0);
  for (Index c = 0; c < raw.data.rows(); ++c) {
    const double mean = raw.data.row(c).mean();
    const double var = (raw.data.row(c).array() - mean).square().mean();
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(raw.data.allFinite());

  // Scale invariance of the full pipeline: amplifier gain cancels.
  Recording<double> scaled = rec;
  scaled.data *= 250.0;
  const auto raw2 = preprocess_raw(scaled);
  CHECK((raw.data - raw2.data).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("temporal_shift advances the signal and zero-pads the tail") {
  const auto x = row({1, 2, 3, 4});
  // 0.5 s at 4 Hz -> 2 samples.
  const auto y = temporal_shift(x, 4.0, 0.5);
  CHECK(y(0, 0) == 3);
  CHECK(y(0, 1) == 4);
  CHECK(y(0, 2) == 0);
  CHECK(y(0, 3) == 0);

  const auto same = temporal_shift(x, 4.0, 0.0);
  CHECK((same - x).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(temporal_shift(x, 4.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(temporal_shift(x, 4.0, -0.5), std::invalid_argument);
}

TEST_CASE("extract_features on a constant signal") {
  // fs=100 and 0.05 s -> w=5. Constant 3: MA=3, Haar=0, RMS=3, ZCR=0, |x|=3.
  EegRaw<double> in;
  in.fs = 100.0;
  in.data = SignalMatrix<double>::Constant(2, 40, 3.0);
  const auto f = extract_features(in);
  CHECK(f.features_per_channel == 5);
  CHECK(f.data.rows() == 10);
  CHECK(f.data.cols() == 40);
  for (Index c = 0; c < 2; ++c)
    for (Index t = 0; t < 40; ++t) {
      CHECK(f.data(c * 5 + 0, t) == doctest::Approx(3.0));
      CHECK(f.data(c * 5 + 1, t) == doctest::Approx(0.0));
      CHECK(f.data(c * 5 + 2, t) == doctest::Approx(3.0));
      CHECK(f.data(c * 5 + 3, t) == doctest::Approx(0.0));
      CHECK(f.data(c * 5 + 4, t) == doctest::Approx(3.0));
    }
}

TEST_CASE("extract_features zero-crossing rate on an alternating signal") {
  EegRaw<double> in;
  in.fs = 100.0;
  in.data.resize(1, 30);
  for (Index t = 0; t < 30; ++t) in.data(0, t) = (t % 2 == 0) ? 1.0 : -1.0;
  const auto f = extract_features(in);  // w = 5, h = 2
  for (Index t = 2; t < 28; ++t) {
    CHECK(f.data(3, t) == doctest::Approx(1.0));   // every adjacent pair crosses
    CHECK(f.data(4, t) == doctest::Approx(1.0));   // rectified mean
    CHECK(f.data(2, t) == doctest::Approx(1.0));   // rectified RMS
  }
}

TEST_CASE("extract_features streams match a direct windowed computation") {
  Rng rng(21);
  EegRaw<double> in;
  in.fs = 100.0;
  in.data = random_signal(2, 64, rng);
  const auto f = extract_features(in);  // w = 5, h = 2, pad = 4

  const Index w = 5, h = 2, T = 64;
  const auto at = [&](Index c, Index i) {
    return in.data(c, detail::reflect_index(i, T));
  };
  for (Index c = 0; c < 2; ++c) {
    for (Index t : {Index(0), Index(1), Index(17), Index(62), Index(63)}) {
      // Stream 0: double moving average.
      double outer = 0.0;
      for (Index u = t - h; u <= t + h; ++u) {
        double inner = 0.0;
        for (Index v = u - h; v <= u + h; ++v) inner += at(c, v);
        outer += inner / w;
      }
      CHECK(f.data(c * 5 + 0, t) == doctest::Approx(outer / w).epsilon(1e-9));

      // Stream 1: RMS of Haar detail coefficients over in-window pairs.
      double dsum = 0.0;
      for (Index p = 0; p < (w - 1) / 2; ++p) {
        const Index a = t - h + 2 * p;
        const double d = (at(c, a) - at(c, a + 1)) / std::sqrt(2.0);
        dsum += d * d;
      }
      CHECK(f.data(c * 5 + 1, t) ==
            doctest::Approx(std::sqrt(dsum / ((w - 1) / 2))).epsilon(1e-9));

      // Stream 2: RMS.
      double sq = 0.0;
      for (Index v = t - h; v <= t + h; ++v) sq += at(c, v) * at(c, v);
      CHECK(f.data(c * 5 + 2, t) == doctest::Approx(std::sqrt(sq / w)).epsilon(1e-9));

      // Stream 3: zero-crossing rate with sign(0) positive.
      double zc = 0.0;
      for (Index v = t - h; v < t + h; ++v)
        zc += ((at(c, v) >= 0) != (at(c, v + 1) >= 0)) ? 1.0 : 0.0;
      CHECK(f.data(c * 5 + 3, t) == doctest::Approx(zc / (w - 1)).epsilon(1e-9));

      // Stream 4: rectified mean.
      double ab = 0.0;
      for (Index v = t - h; v <= t + h; ++v) ab += std::abs(at(c, v));
      CHECK(f.data(c * 5 + 4, t) == doctest::Approx(ab / w).epsilon(1e-9));
    }
  }
}

TEST_CASE("extract_features forces an odd window") {
  EegRaw<double> in;
  in.fs = 100.0;  // 0.04 s -> 4 samples -> forced to 5
  Rng rng(2);
  in.data = random_signal(1, 32, rng);
  FeatureOptions opt;
  opt.window_s = 0.04;
  const auto a = extract_features(in, opt);
  opt.window_s = 0.05;
  const auto b = extract_features(in, opt);
  CHECK((a.data - b.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("time_mask zeroes spans and degenerate parameters are identities") {
  Rng rng(31);
  const auto x = random_signal(3, 50, rng);

  Rng r1(5);
  const auto none = time_mask(x, 0.0, 4, r1);
  CHECK((none - x).cwiseAbs().maxCoeff() == 0.0);

  Rng r2(5);
  const auto zero_masks = time_mask(x, 0.5, 0, r2);
  CHECK((zero_masks - x).cwiseAbs().maxCoeff() == 0.0);

  Rng r3(5);
  const auto masked = time_mask(x, 0.4, 2, r3);
  // Every column is either untouched or zero across all channels.
  Index zeroed = 0;
  for (Index t = 0; t < x.cols(); ++t) {
    const bool is_zero = masked.col(t).cwiseAbs().maxCoeff() == 0.0;
    const bool is_same = (masked.col(t) - x.col(t)).cwiseAbs().maxCoeff() == 0.0;
    CHECK((is_zero || is_same));
    if (is_zero && !is_same) ++zeroed;
  }
  CHECK(zeroed <= 2 * 20);  // at most n_masks * floor(0.4 * 50)

  CHECK_THROWS_AS(time_mask(x, 1.5, 1, r3), std::invalid_argument);
}

TEST_CASE("freq_mask removes energy, preserves the rest, and keeps output real") {
  Rng rng(41);
  const auto x = random_signal(2, 64, rng);

  Rng r1(6);
  const auto none = freq_mask(x, 0.0, 3, r1);
  CHECK((none - x).cwiseAbs().maxCoeff() == 0.0);

  Rng r2(6);
  const auto masked = freq_mask(x, 0.3, 2, r2);
  CHECK(masked.allFinite());
  // Masking only removes spectral energy (Parseval).
  for (Index c = 0; c < x.rows(); ++c)
    CHECK(masked.row(c).squaredNorm() <= x.row(c).squaredNorm() + 1e-9);
}

TEST_CASE("freq_mask kills a pure tone inside the band") {
  // 64-sample signal, tone at bin 8; mask the whole lower half-spectrum.
  SignalMatrix<double> x(1, 64);
  for (Index t = 0; t < 64; ++t) x(0, t) = std::cos(2.0 * M_PI * 8.0 * t / 64.0);
  // max_band_frac = 1 allows a band as wide as the half spectrum; draw until
  // the band covers bin 8. With a fixed seed this is deterministic, so pick a
  // seed where it does.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const auto masked = freq_mask(x, 1.0, 1, r);
    const double energy = masked.row(0).squaredNorm();
    if (energy < 1e-12) return;  // tone removed entirely by some draw
  }
  FAIL("no seed produced a band covering the tone");
}

TEST_CASE("signal pipeline is deterministic under a fixed seed") {
  const auto make = [](std::uint64_t seed) {
    Rng rng(seed);
    auto x = random_signal(4, 128, rng, 2.0);
    Rng mask_rng(seed + 1);
    x = time_mask(x, 0.2, 2, mask_rng);
    return freq_mask(x, 0.2, 2, mask_rng);
  };
  const auto a = make(17), b = make(17);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
