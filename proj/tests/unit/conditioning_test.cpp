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
#include <vector>

#include "voxbm/biomarkers/periods.hpp"
#include "voxbm/biomarkers/pitch.hpp"
#include "voxbm/conditioning/calibration.hpp"
#include "voxbm/conditioning/denoise.hpp"
#include "voxbm/conditioning/noise.hpp"
#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/synth.hpp"

namespace cond = voxbm::conditioning;
namespace bm = voxbm::biomarkers;
namespace synth = voxbm::dsp::synth;
using voxbm::ErrorCode;
using voxbm::dsp::Waveform;

namespace {

constexpr int kRate = 16000;

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const voxbm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

double power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

std::vector<double> diff(const Waveform& a, const Waveform& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.samples[i] - b.samples[i];
  return d;
}

/// SNR of `est` against the known clean reference.
double snr_vs(const Waveform& clean, const Waveform& est) {
  return 10.0 * std::log10(power(clean.samples) / power(diff(est, clean)));
}

Waveform join(const Waveform& a, const Waveform& b) { return voxbm::dsp::concat(a, b); }

/// `clean` plus white noise whose power is set from the non-silent part.
Waveform add_white(const Waveform& clean, double snr_over_signal_db, double signal_power, std::uint64_t seed) {
  const auto n = synth::white_noise(clean.duration_seconds(), clean.sample_rate, 1.0, seed);
  const double sigma = std::sqrt(signal_power / std::pow(10.0, snr_over_signal_db / 10.0));
  Waveform out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += sigma * n.samples[i];
  return out;
}

/// Ideal frequency-domain shelf: bins above `corner_hz` scaled by `gain_db`.
Waveform ideal_shelf(const Waveform& w, double corner_hz, double gain_db) {
  const std::size_t n = voxbm::dsp::next_power_of_two(w.size());
  auto spec = voxbm::dsp::fft_real(voxbm::dsp::zero_padded(w.samples, n));
  const double g = std::pow(10.0, gain_db / 20.0);
  for (std::size_t k = 0; k < spec.bins.size(); ++k) {
    if (static_cast<double>(k) * kRate / static_cast<double>(n) > corner_hz) spec.bins[k] *= g;
  }
  auto x = voxbm::dsp::inverse_fft_real(spec);
  x.resize(w.size());
  return Waveform{std::move(x), w.sample_rate};
}

}  // namespace

// ---------------------------------------------------------------------------
// mix_noise

TEST(MixNoise, WhiteNoiseHitsTargetSnrAcrossRange) {
  const auto clean = synth::sine(440.0, 1.0, kRate, 0.05);
  for (double target = -10.0; target <= 40.0; target += 5.0) {
    const auto mixed = cond::mix_noise(clean, cond::NoiseProfile::white(target), 7);
    ASSERT_LE(voxbm::dsp::peak_abs(mixed.samples), 1.0);
    EXPECT_NEAR(snr_vs(clean, mixed), target, 0.1) << target;
  }
}

TEST(MixNoise, RecordedNoiseHitsTargetSnr) {
  const auto clean = synth::sine(300.0, 1.0, kRate, 0.1);
  const auto chatter = cond::chatter_noise(2.5, kRate, 3);
  const auto household = cond::household_noise(2.5, 8000, 4);
  for (const auto& src : {chatter, household}) {
    const auto mixed = cond::mix_noise(clean, cond::NoiseProfile::recorded(src, 10.0), 11);
    EXPECT_EQ(mixed.size(), clean.size());
    EXPECT_NEAR(snr_vs(clean, mixed), 10.0, 0.1);
  }
}

TEST(MixNoise, SeedDeterminism) {
  const auto clean = synth::sine(440.0, 0.5, kRate, 0.3);
  const auto src = cond::household_noise(3.0, kRate, 9);
  const auto p = cond::NoiseProfile::recorded(src, 15.0);
  const auto a = cond::mix_noise(clean, p, 1);
  const auto b = cond::mix_noise(clean, p, 1);
  const auto c = cond::mix_noise(clean, p, 2);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  const auto w1 = cond::mix_noise(clean, cond::NoiseProfile::white(15.0), 1);
  const auto w2 = cond::mix_noise(clean, cond::NoiseProfile::white(15.0), 2);
  EXPECT_NE(w1.samples, w2.samples);
}

TEST(MixNoise, VeryHighTargetReturnsCleanUnchanged) {
  const auto clean = synth::sine(440.0, 0.5, kRate, 0.3);
  EXPECT_EQ(cond::mix_noise(clean, cond::NoiseProfile::white(120.0), 1).samples, clean.samples);
  EXPECT_EQ(cond::mix_noise(clean, cond::NoiseProfile::white(INFINITY), 1).samples, clean.samples);
}

TEST(MixNoise, ClippingMixIsPeakNormalized) {
  const auto clean = synth::sine(440.0, 0.5, kRate, 0.95);
  const auto mixed = cond::mix_noise(clean, cond::NoiseProfile::white(0.0), 5);
  EXPECT_NEAR(voxbm::dsp::peak_abs(mixed.samples), cond::kMixPeakLimit, 1e-12);

  // Oracle: unnormalized mix at 0 dB, then one common rescale.
  const auto n = cond::noise_samples(cond::NoiseProfile::white(0.0), clean.size(), kRate, 5);
  const double g = std::sqrt(power(clean.samples) / power(n));
  std::vector<double> raw(clean.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = clean.samples[i] + g * n[i];
  const double scale = cond::kMixPeakLimit / voxbm::dsp::peak_abs(raw);
  for (std::size_t i = 0; i < raw.size(); ++i) ASSERT_NEAR(mixed.samples[i], scale * raw[i], 1e-12);
  EXPECT_NEAR(snr_vs(voxbm::dsp::scaled(clean, scale), mixed), 0.0, 0.1);
}

TEST(MixNoise, Errors) {
  const auto silent = synth::silence(0.5, kRate);
  EXPECT_EQ(error_of([&] { cond::mix_noise(silent, cond::NoiseProfile::white(10.0), 1); }), ErrorCode::kSilentInput);
  const auto clean = synth::sine(440.0, 0.5, kRate, 0.3);
  EXPECT_EQ(error_of([&] { cond::mix_noise(clean, cond::NoiseProfile::recorded(silent, 10.0), 1); }),
            ErrorCode::kSilentInput);
  cond::NoiseProfile no_source{cond::NoiseKind::kRecorded, std::nullopt, 10.0};
  EXPECT_EQ(error_of([&] { cond::mix_noise(clean, no_source, 1); }), ErrorCode::kInvalidArgument);
}

TEST(SyntheticNoise, SourcesAreSeededAndBounded) {
  for (auto gen : {cond::chatter_noise, cond::household_noise}) {
    const auto a = gen(1.0, kRate, 1);
    EXPECT_EQ(a.size(), static_cast<std::size_t>(kRate));
    EXPECT_EQ(a.samples, gen(1.0, kRate, 1).samples);
    EXPECT_NE(a.samples, gen(1.0, kRate, 2).samples);
    EXPECT_NEAR(voxbm::dsp::peak_abs(a.samples), 0.5, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// spectral_subtract

TEST(SpectralSubtract, ImprovesTenDbSineMixtureByFiveDb) {
  const auto tone = synth::sine(500.0, 1.5, kRate, 0.5);
  const auto clean = join(synth::silence(0.5, kRate), tone);
  const auto noisy = add_white(clean, 10.0, power(tone.samples), 21);
  const auto out = cond::spectral_subtract(noisy, 0.5);
  ASSERT_EQ(out.size(), noisy.size());
  ASSERT_EQ(out.sample_rate, noisy.sample_rate);
  const double before = snr_vs(clean, noisy);
  const double after = snr_vs(clean, out);
  EXPECT_GE(after - before, 5.0) << before << " -> " << after;
}

TEST(SpectralSubtract, CleanInputWithSilentHeadIsUnchanged) {
  const auto clean = join(synth::silence(0.5, kRate), synth::sine(300.0, 1.0, kRate, 0.5));
  const auto out = cond::spectral_subtract(clean, 0.5);
  const double change_db = 10.0 * std::log10(power(out.samples) / power(clean.samples));
  EXPECT_LT(std::abs(change_db), 1.0);
  EXPECT_LT(power(diff(out, clean)), 1e-20);
}

TEST(SpectralSubtract, NoiseOnlyInputDropsTenDb) {
  const auto noise = synth::white_noise(2.0, kRate, 0.1, 5);
  const auto out = cond::spectral_subtract(noise, 0.5);
  EXPECT_LE(10.0 * std::log10(power(out.samples) / power(noise.samples)), -10.0);
}

TEST(SpectralSubtract, PreservesLengthForOddSizes) {
  const Waveform w = synth::white_noise(1.2345, 11025, 0.1, 3);
  const auto out = cond::spectral_subtract(w, 0.3);
  EXPECT_EQ(out.size(), w.size());
  EXPECT_EQ(out.sample_rate, 11025);
}

TEST(SpectralSubtract, Errors) {
  const auto w = synth::white_noise(0.4, kRate, 0.1, 1);
  EXPECT_EQ(error_of([&] { cond::spectral_subtract(w, 0.5); }), ErrorCode::kTooShort);
  EXPECT_EQ(error_of([&] { cond::spectral_subtract(w, 0.05); }), ErrorCode::kInvalidArgument);
}

TEST(SpectralSubtract, JitterSurvivesNoiseAndDenoising) {
  synth::VoiceParams vp;
  vp.f0_hz = 110.0;
  vp.seconds = 2.0;
  vp.period_perturbation = 0.01;
  vp.seed = 12;
  const auto clean = join(synth::silence(0.5, kRate), synth::vowel(vp));
  const auto noisy = cond::mix_noise(clean, cond::NoiseProfile::white(20.0), 8);
  const auto denoised = cond::spectral_subtract(noisy, 0.5);
  auto jitter = [](const Waveform& w) {
    return bm::jitter_metrics(bm::mark_periods(w, bm::track_pitch(w))).local_pct;
  };
  const double a = jitter(clean);
  const double b = jitter(denoised);
  EXPECT_LT(std::abs(a - b), 2.0) << a << " vs " << b;
}

// ---------------------------------------------------------------------------
// Denoising autoencoder

namespace {

std::vector<Waveform> sine_corpus() {
  std::vector<Waveform> out;
  for (double f : {250.0, 400.0, 550.0, 800.0, 1000.0, 1300.0}) out.push_back(synth::sine(f, 0.5, kRate, 0.4));
  return out;
}

cond::DaeConfig small_dae() {
  cond::DaeConfig c;
  c.epochs = 25;
  c.learning_rate = 2e-3;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Dae, IdentityPairsReconstructBelowFrameVariance) {
  auto cfg = small_dae();
  cfg.mixes_per_profile = 1;
  const auto model = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(cond::kCleanSnrDb)}, cfg);
  // Targets are z-normalized per bin, so their variance is 1 wherever a bin varies.
  EXPECT_LT(model.final_loss, 0.5);
  EXPECT_EQ(model.network.input_width(), model.network.output_width());
  EXPECT_EQ(static_cast<std::size_t>(model.network.input_width()), model.bins());
}

TEST(Dae, ImprovesHeldOutNoisySineByThreeDb) {
  const auto model = cond::train_dae(
      sine_corpus(), {cond::NoiseProfile::white(5.0), cond::NoiseProfile::white(10.0)}, small_dae());
  // Unseen recording: longer, different phase, fresh noise draw.
  const auto clean = synth::sine(800.0, 1.0, kRate, 0.4, 1.0);
  const auto noisy = cond::mix_noise(clean, cond::NoiseProfile::white(5.0), 999);
  const auto out = cond::apply_dae(model, noisy);
  ASSERT_EQ(out.size(), noisy.size());
  const double before = snr_vs(clean, noisy);
  const double after = snr_vs(clean, out);
  EXPECT_GE(after - before, 3.0) << before << " -> " << after;
}

TEST(Dae, LossHistoryFiniteAndDecreasing) {
  const auto model = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, small_dae());
  ASSERT_EQ(model.loss_history.size(), 25u);
  for (double l : model.loss_history) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LE(model.final_loss, model.initial_loss);
}

TEST(Dae, SilenceStaysSilentAndLengthIsPreserved) {
  auto cfg = small_dae();
  cfg.epochs = 2;
  const auto model = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, cfg);
  const auto silent = synth::silence(0.7, kRate);
  const auto out = cond::apply_dae(model, silent);
  EXPECT_EQ(out.size(), silent.size());
  EXPECT_LE(voxbm::dsp::peak_abs(out.samples), 1e-3);

  const auto other_rate = synth::sine(440.0, 0.77, 22050, 0.3);
  const auto resampled = cond::apply_dae(model, other_rate);
  EXPECT_EQ(resampled.size(), other_rate.size());
  EXPECT_EQ(resampled.sample_rate, 22050);
}

TEST(Dae, NeverAmplifiesABin) {
  auto cfg = small_dae();
  cfg.epochs = 3;
  const auto model = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, cfg);
  const auto noisy = cond::mix_noise(synth::sine(700.0, 0.5, kRate, 0.3), cond::NoiseProfile::white(0.0), 2);
  const auto out = cond::apply_dae(model, noisy);
  EXPECT_LE(power(out.samples), power(noisy.samples) * (1.0 + 1e-9));
}

TEST(Dae, TrainingIsSeedDeterministic) {
  auto cfg = small_dae();
  cfg.epochs = 3;
  const auto a = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, cfg);
  const auto b = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, cfg);
  EXPECT_TRUE(a.network == b.network);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Dae, JsonRoundTrip) {
  auto cfg = small_dae();
  cfg.epochs = 1;
  cfg.hidden_widths = {32, 16, 32};
  const auto m = cond::train_dae(sine_corpus(), {cond::NoiseProfile::white(10.0)}, cfg);
  const auto back = cond::dae_from_json(nlohmann::json::parse(cond::dae_to_json(m).dump()));
  EXPECT_TRUE(back.network == m.network);
  EXPECT_EQ(back.input_norm.mean, m.input_norm.mean);
  EXPECT_EQ(back.target_norm.scale, m.target_norm.scale);
  EXPECT_EQ(back.log_offset, m.log_offset);
  EXPECT_EQ(back.frame_length, m.frame_length);
  auto bad = cond::dae_to_json(m);
  bad["input_mean"].erase(0);
  EXPECT_EQ(error_of([&] { cond::dae_from_json(bad); }), ErrorCode::kFormatError);
}

TEST(Dae, Errors) {
  EXPECT_EQ(error_of([] { cond::train_dae({}, {cond::NoiseProfile::white(10.0)}); }), ErrorCode::kEmptyCorpus);
  EXPECT_EQ(error_of([] { cond::train_dae({synth::silence(0.5, kRate)}, {cond::NoiseProfile::white(10.0)}); }),
            ErrorCode::kSilentInput);
}

// ---------------------------------------------------------------------------
// Calibration

TEST(Calibration, BandsAreThirdOctavesFrom63HzTo8kHz) {
  const auto c = cond::third_octave_centers();
  ASSERT_EQ(c.size(), 22u);
  EXPECT_NEAR(c.front(), 62.5, 1e-9);
  EXPECT_NEAR(c.back(), 8000.0, 1e-9);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i] / c[i - 1], std::cbrt(2.0), 1e-12);
}

TEST(Calibration, IdentityGivesZeroGains) {
  const auto sweep = cond::calibration_sweep();
  const auto curve = cond::estimate_calibration(sweep, sweep);
  for (double g : curve.gains_db) EXPECT_NEAR(g, 0.0, 0.1);
}

TEST(Calibration, BroadbandHalfGainReportsSixDb) {
  const auto sweep = cond::calibration_sweep();
  const auto curve = cond::estimate_calibration(sweep, voxbm::dsp::scaled(sweep, 0.5));
  for (double g : curve.gains_db) EXPECT_NEAR(g, 20.0 * std::log10(2.0), 0.2);
}

TEST(Calibration, ShelfAboveTwoKilohertzIsDetected) {
  const auto sweep = cond::calibration_sweep();
  const auto device = ideal_shelf(sweep, 2000.0, -6.0);
  const auto curve = cond::estimate_calibration(sweep, device);
  for (std::size_t i = 0; i < curve.gains_db.size(); ++i) {
    const double c = curve.band_centers_hz[i];
    if (cond::band_lower_hz(c) > 2000.0) {
      EXPECT_NEAR(curve.gains_db[i], 6.0, 1.0) << c;
    } else if (cond::band_upper_hz(c) < 2000.0) {
      EXPECT_NEAR(curve.gains_db[i], 0.0, 1.0) << c;
    }
  }
}

TEST(Calibration, RoundTripMatchesReferenceBands) {
  const auto sweep = cond::calibration_sweep();
  const auto centers = cond::third_octave_centers();
  for (const auto& device : {ideal_shelf(sweep, 2000.0, -6.0), ideal_shelf(voxbm::dsp::scaled(sweep, 0.3), 500.0, 9.0)}) {
    const auto fixed = cond::apply_calibration(device, cond::estimate_calibration(sweep, device));
    const auto ref = cond::band_energies_db(sweep, centers);
    const auto got = cond::band_energies_db(fixed, centers);
    for (std::size_t b = 0; b < centers.size(); ++b) EXPECT_NEAR(got[b], ref[b], 1.0) << centers[b];
  }
}

TEST(Calibration, ZeroCurveIsIdentity) {
  const auto w = synth::white_noise(1.3, kRate, 0.2, 4);
  const auto out = cond::apply_calibration(w, cond::CalibrationCurve{});
  ASSERT_EQ(out.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_NEAR(out.samples[i], w.samples[i], 1e-6);
}

TEST(Calibration, ExtremeGainsAreClamped) {
  const auto w = synth::white_noise(1.0, kRate, 0.01, 4);
  cond::CalibrationCurve curve;
  std::fill(curve.gains_db.begin(), curve.gains_db.end(), 60.0);
  const auto out = cond::apply_calibration(w, curve);
  EXPECT_NEAR(10.0 * std::log10(power(out.samples) / power(w.samples)), cond::kMaxCalibrationGainDb, 0.1);

  const auto sweep = cond::calibration_sweep();
  const auto est = cond::estimate_calibration(sweep, voxbm::dsp::scaled(sweep, 1e-3));
  for (double g : est.gains_db) EXPECT_DOUBLE_EQ(g, cond::kMaxCalibrationGainDb);
}

TEST(Calibration, JsonRoundTrip) {
  const auto sweep = cond::calibration_sweep();
  const auto curve = cond::estimate_calibration(sweep, ideal_shelf(sweep, 1000.0, 3.0));
  const auto j = cond::calibration_to_json(curve);
  ASSERT_TRUE(j.contains("band_centers_hz"));
  ASSERT_TRUE(j.contains("gains_db"));
  const auto back = cond::calibration_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.gains_db, curve.gains_db);
  EXPECT_EQ(error_of([] { cond::calibration_from_json(nlohmann::json{{"gains_db", {1.0}}}); }),
            ErrorCode::kFormatError);
}

TEST(Calibration, Errors) {
  const auto sweep = cond::calibration_sweep();
  const auto silent = synth::silence(6.0, kRate);
  EXPECT_EQ(error_of([&] { cond::estimate_calibration(sweep, silent); }), ErrorCode::kSilentInput);
  const auto shorter = synth::log_sweep(40.0, 7900.0, 5.0, kRate);
  EXPECT_EQ(error_of([&] { cond::estimate_calibration(sweep, shorter); }), ErrorCode::kInvalidArgument);
}
