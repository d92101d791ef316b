/*
 * Copyright 2026 The voxbm Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/dsp/analysis.hpp"
#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/resample.hpp"
#include "voxbm/dsp/stft.hpp"
#include "voxbm/dsp/synth.hpp"
#include "voxbm/dsp/window.hpp"
#include "voxbm/io/wav.hpp"

namespace voxbm::dsp {
namespace {

using testing::naive_dft;
using testing::random_vector;

// ---------------------------------------------------------------------------
// window_frames
// ---------------------------------------------------------------------------

TEST(WindowFrames, CountMatchesFloorFormula) {
  Waveform w{std::vector<double>(16000, 0.25), 16000};
  auto seq = window_frames(w, 0.040, 0.010, WindowKind::kHann);
  EXPECT_EQ(seq.count(), 97u);  // floor((16000 - 640) / 160) + 1
  EXPECT_EQ(seq.frame_length, 640u);
  EXPECT_EQ(seq.hop, 160u);
}

TEST(WindowFrames, RectangularLeavesFrameUnchanged) {
  Waveform w{std::vector<double>(100, 1.0), 1000};
  auto seq = window_frames(w, 0.010, 0.005, WindowKind::kRectangular);
  for (const auto& f : seq.frames) {
    for (double v : f) EXPECT_EQ(v, 1.0);
  }
}

TEST(WindowFrames, HannMatchesFormula) {
  auto w = make_window(WindowKind::kHann, 8);
  for (std::size_t n = 0; n < 8; ++n) {
    EXPECT_NEAR(w[n], 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 7.0), 1e-15);
  }
  EXPECT_NEAR(w.front(), 0.0, 1e-15);
  EXPECT_NEAR(w.back(), 0.0, 1e-15);
  auto odd = make_window(WindowKind::kHann, 9);
  EXPECT_NEAR(odd[4], 1.0, 1e-15);
}

TEST(WindowFrames, GaussianUsesSixthOfLength) {
  auto w = make_window(WindowKind::kGaussian, 61);
  EXPECT_NEAR(w[30], 1.0, 1e-15);
  // one sigma (= 61/6 samples) from centre
  const double sigma = 61.0 / 6.0;
  EXPECT_NEAR(w[0], std::exp(-0.5 * (30.0 / sigma) * (30.0 / sigma)), 1e-15);
}

TEST(WindowFrames, TrailingPartialFrameDropped) {
  Waveform w{std::vector<double>(105, 1.0), 100};
  auto seq = window_frames(w, 0.5, 0.25, WindowKind::kRectangular);
  EXPECT_EQ(seq.count(), 3u);  // starts 0, 25, 50; 75 would overrun
}

TEST(WindowFrames, Errors) {
  Waveform empty{{}, 16000};
  EXPECT_THROW(window_frames(empty, 0.04, 0.01, WindowKind::kHann), Error);
  Waveform tiny{std::vector<double>(100, 0.0), 16000};
  try {
    window_frames(tiny, 0.04, 0.01, WindowKind::kHann);
    FAIL() << "expected TooShort";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
}

// ---------------------------------------------------------------------------
// fft_real
// ---------------------------------------------------------------------------

TEST(Fft, ImpulseIsFlat) {
  std::vector<double> x(8, 0.0);
  x[0] = 1.0;
  auto s = fft_real(x);
  ASSERT_EQ(s.bins.size(), 5u);
  for (const auto& b : s.bins) EXPECT_NEAR(std::abs(b), 1.0, 1e-15);
}

TEST(Fft, ConstantIsDcOnly) {
  std::vector<double> x(8, 1.0);
  auto s = fft_real(x);
  EXPECT_NEAR(std::abs(s.bins[0]), 8.0, 1e-14);
  for (std::size_t k = 1; k < s.bins.size(); ++k) EXPECT_NEAR(std::abs(s.bins[k]), 0.0, 1e-14);
}

TEST(Fft, ExactBinSineMatchesNaiveDft) {
  std::vector<double> x(1024);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * i / 8000.0);
  auto s = fft_real(x);
  auto ref = naive_dft(x);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    if (std::abs(s.bins[k]) > std::abs(s.bins[peak])) peak = k;
    EXPECT_NEAR(std::abs(s.bins[k] - ref[k]), 0.0, 1e-9);
  }
  EXPECT_EQ(peak, 128u);
  EXPECT_NEAR(s.bin_hz(8000), 8000.0 / 1024.0, 1e-12);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<double> x(12, 1.0);
  try {
    fft_real(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadLength);
  }
}

TEST(FftProperty, NaiveDftRoundTripAndParseval) {
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto x = random_vector(n, seed * 7919 + n);
      auto s = fft_real(x);
      auto ref = naive_dft(x);
      double scale = 0.0;
      for (const auto& b : ref) scale = std::max(scale, std::abs(b));
      for (std::size_t k = 0; k < ref.size(); ++k) {
        EXPECT_LE(std::abs(s.bins[k] - ref[k]), 1e-9 * std::max(1.0, scale)) << "n=" << n << " k=" << k;
      }
      auto back = inverse_fft_real(s);
      double err = 0.0;
      double norm = 0.0;
      double time_energy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        err = std::max(err, std::abs(back[i] - x[i]));
        norm = std::max(norm, std::abs(x[i]));
        time_energy += x[i] * x[i];
      }
      EXPECT_LE(err, 1e-9 * norm);
      double freq_energy = std::norm(s.bins.front()) + std::norm(s.bins.back());
      for (std::size_t k = 1; k + 1 < s.bins.size(); ++k) freq_energy += 2.0 * std::norm(s.bins[k]);
      if (n == 2) freq_energy = std::norm(s.bins[0]) + std::norm(s.bins[1]);
      EXPECT_LE(std::abs(time_energy - freq_energy / n), 1e-9 * time_energy);
    }
  }
}

// ---------------------------------------------------------------------------
// autocorr_normalized
// ---------------------------------------------------------------------------

TEST(Autocorr, LagZeroIsOne) {
  auto x = random_vector(300, 5);
  EXPECT_DOUBLE_EQ(autocorr_normalized(x, WindowKind::kHann)[0], 1.0);
  EXPECT_DOUBLE_EQ(autocorr_normalized(x, WindowKind::kGaussian)[0], 1.0);
}

TEST(Autocorr, PeriodicSineScoresNearOneAtPeriod) {
  std::vector<double> x(400);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * i / 80.0);
  auto r = autocorr_normalized(x, WindowKind::kRectangular);
  EXPECT_GE(r[80], 0.99);
  std::size_t best = 60;
  for (std::size_t lag = 60; lag <= 100; ++lag) {
    if (r[lag] > r[best]) best = lag;
  }
  EXPECT_LE(best > 80 ? best - 80 : 80 - best, 1u);
  EXPECT_GE(r[best], 0.99);
  // Oracle: rectangular normalization is the unbiased direct-sum estimate.
  auto brute = testing::brute_autocorr(x, 200);
  EXPECT_NEAR(r[80], brute[80] * 400.0 / 320.0, 1e-9);
}

TEST(Autocorr, WhiteNoiseHasNoStructure) {
  auto x = random_vector(4096, 42);
  auto r = autocorr_normalized(x, WindowKind::kRectangular);
  for (std::size_t lag = 1; lag < r.size(); ++lag) EXPECT_LT(std::abs(r[lag]), 0.2) << lag;
}

TEST(Autocorr, SilentFrameRejected) {
  std::vector<double> x(64, 0.0);
  try {
    autocorr_normalized(x, WindowKind::kHann);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSilentFrame);
  }
}

TEST(AutocorrProperty, SignSymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = random_vector(128 + seed * 13, seed);
    auto neg = x;
    for (double& v : neg) v = -v;
    auto a = autocorr_normalized(x, WindowKind::kHann);
    auto b = autocorr_normalized(neg, WindowKind::kHann);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

// ---------------------------------------------------------------------------
// lpc_burg
// ---------------------------------------------------------------------------

std::vector<double> ar2_process(double a1, double a2, std::size_t n, std::uint64_t seed) {
  auto e = random_vector(n + 200, seed);
  std::vector<double> x(n + 200, 0.0);
  for (std::size_t i = 2; i < x.size(); ++i) x[i] = a1 * x[i - 1] + a2 * x[i - 2] + e[i];
  return std::vector<double>(x.begin() + 200, x.end());
}

TEST(Lpc, RecoversAr2Coefficients) {
  auto x = ar2_process(1.0, -0.5, 8192, 17);
  auto fit = lpc_burg(x, 2);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 0.05);
  EXPECT_NEAR(fit.coefficients[1], -0.5, 0.05);
  EXPECT_NEAR(fit.gain, 1.0, 0.1);
}

TEST(Lpc, WhiteNoiseGivesNearZeroCoefficients) {
  auto x = random_vector(8192, 23);
  auto fit = lpc_burg(x, 2);
  EXPECT_NEAR(fit.coefficients[0], 0.0, 0.05);
  EXPECT_NEAR(fit.coefficients[1], 0.0, 0.05);
}

TEST(Lpc, Preconditions) {
  std::vector<double> x(10, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * i);
  EXPECT_THROW(lpc_burg(x, 10), Error);
  EXPECT_THROW(lpc_burg(x, 1), Error);
  std::vector<double> constant(64, 0.7);
  try {
    lpc_burg(constant, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllConditioned);
  }
}

TEST(LpcProperty, AllPoleSpectralPeaksRecovered) {
  // Two resonances, excitation by seeded noise; the LPC envelope must peak at
  // the pole frequencies within 5%.
  const int fs = 10000;
  const std::vector<double> poles_hz = {800.0, 2200.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = random_vector(4096, seed);
    for (double f : poles_hz) synth::resonate(x, f, 60.0, fs);
    auto fit = lpc_burg(x, 4);
    // envelope 1 / |A(e^jw)| on a fine grid
    std::vector<double> env(2000);
    for (std::size_t i = 0; i < env.size(); ++i) {
      const double w = std::numbers::pi * i / env.size();
      std::complex<double> a = 1.0;
      for (std::size_t k = 0; k < fit.coefficients.size(); ++k) {
        a -= fit.coefficients[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
      }
      env[i] = 1.0 / std::abs(a);
    }
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < env.size(); ++i) {
      if (env[i] > env[i - 1] && env[i] >= env[i + 1]) peaks.push_back(0.5 * fs * i / env.size());
    }
    ASSERT_EQ(peaks.size(), 2u) << "seed " << seed;
    EXPECT_NEAR(peaks[0], 800.0, 40.0);
    EXPECT_NEAR(peaks[1], 2200.0, 110.0);
  }
}

// ---------------------------------------------------------------------------
// real_cepstrum
// ---------------------------------------------------------------------------

TEST(Cepstrum, PulseTrainPeaksAtPeriod) {
  std::vector<double> x(1024, 0.0);
  for (std::size_t i = 0; i < x.size(); i += 64) x[i] = 1.0;
  auto w = make_window(WindowKind::kHann, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= w[i];
  auto c = real_cepstrum(x);
  std::size_t best = 20;
  for (std::size_t q = 20; q < 400; ++q) {
    if (c[q] > c[best]) best = q;
  }
  EXPECT_EQ(best, 64u);
}

TEST(Cepstrum, WhiteNoiseHasNoPeakAboveTrend) {
  const int fs = 16000;
  const std::size_t lo = static_cast<std::size_t>(std::ceil(fs / 300.0));
  const std::size_t hi = static_cast<std::size_t>(std::floor(fs / 60.0));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto x = random_vector(1024, seed);
    auto c = real_cepstrum(x);
    std::vector<double> q;
    std::vector<double> v;
    for (std::size_t i = lo; i <= hi; ++i) {
      q.push_back(static_cast<double>(i));
      v.push_back(c[i]);
    }
    auto line = stats::fit_line(q, v);
    double worst = -1e9;
    for (std::size_t i = 0; i < q.size(); ++i) worst = std::max(worst, v[i] - line(q[i]));
    EXPECT_LE(worst, 3.0) << "seed " << seed;
  }
}

TEST(Cepstrum, SilentFrameRejected) {
  std::vector<double> x(256, 0.0);
  try {
    real_cepstrum(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSilentFrame);
  }
}

// ---------------------------------------------------------------------------
// rms_db
// ---------------------------------------------------------------------------

TEST(RmsDb, ReferenceLevels) {
  auto s = synth::sine(100.0, 1.0, 8000, 1.0);
  EXPECT_NEAR(rms_db(s.samples, 1.0), -3.0103, 1e-3);
  std::vector<double> ones(100, 1.0);
  EXPECT_NEAR(rms_db(ones, 1.0), 0.0, 1e-12);
  std::vector<double> zeros(100, 0.0);
  EXPECT_EQ(rms_db(zeros, 1.0), -120.0);
}

// ---------------------------------------------------------------------------
// Supporting pieces: STFT, resampler, WAV
// ---------------------------------------------------------------------------

TEST(Stft, PerfectReconstruction) {
  auto x = random_vector(5000, 3);
  auto stft = Stft::for_duration(16000, 0.032);
  auto back = stft.synthesize(stft.analyze(x), x.size());
  ASSERT_EQ(back.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-10);
}

TEST(Resample, PreservesInBandSine) {
  auto w = synth::sine(440.0, 0.5, 44100, 0.5);
  auto r = resample(w, 10000);
  EXPECT_EQ(r.sample_rate, 10000);
  EXPECT_EQ(r.size(), 5000u);
  for (std::size_t i = 500; i < 4500; ++i) {
    EXPECT_NEAR(r.samples[i], 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 10000.0), 2e-3);
  }
}

TEST(Wav, Pcm16AndFloatRoundTrip) {
  auto w = synth::sine(220.0, 0.1, 16000, 0.5);
  auto pcm = io::decode_wav(io::encode_wav(w, io::WavEncoding::kPcm16));
  EXPECT_EQ(pcm.sample_rate, 16000);
  ASSERT_EQ(pcm.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(pcm.samples[i], w.samples[i], 1.0 / 32768.0);
  auto flt = io::decode_wav(io::encode_wav(w, io::WavEncoding::kFloat32));
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(flt.samples[i], w.samples[i], 1e-7);
}

TEST(Wav, StereoIsDownmixed) {
  // Hand-built 2-channel 16-bit file: L = 0.5, R = -0.25 for 4 frames.
  auto bytes = io::encode_wav(Waveform{std::vector<double>(8, 0.0), 8000});
  bytes[22] = 2;                     // channels
  bytes[32] = 4;                     // block align
  bytes[28] = static_cast<std::uint8_t>(32000 & 0xFF);
  bytes[29] = static_cast<std::uint8_t>((32000 >> 8) & 0xFF);
  for (int f = 0; f < 4; ++f) {
    const auto l = static_cast<std::uint16_t>(static_cast<std::int16_t>(16384));
    const auto r = static_cast<std::uint16_t>(static_cast<std::int16_t>(-8192));
    bytes[44 + 4 * f] = l & 0xFF;
    bytes[45 + 4 * f] = l >> 8;
    bytes[46 + 4 * f] = r & 0xFF;
    bytes[47 + 4 * f] = r >> 8;
  }
  io::WavInfo info;
  auto w = io::decode_wav(bytes, &info);
  EXPECT_EQ(info.channels, 2);
  ASSERT_EQ(w.size(), 4u);
  for (double v : w.samples) EXPECT_NEAR(v, 0.125, 1e-12);
}

TEST(Wav, GarbageRejected) {
  std::vector<std::uint8_t> junk = {'n', 'o', 'p', 'e'};
  try {
    io::decode_wav(junk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadAudioFormat);
  }
}

}  // namespace
}  // namespace voxbm::dsp
