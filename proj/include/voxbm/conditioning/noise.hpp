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

#pragma once

// SNR-controlled noise mixing and the synthetic background-noise sources used
// when no field recordings are supplied.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/resample.hpp"
#include "voxbm/dsp/synth.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::conditioning {

enum class NoiseKind { kWhite, kRecorded };

struct NoiseProfile {
  NoiseKind kind = NoiseKind::kWhite;
  std::optional<dsp::Waveform> source;  // required for kRecorded
  double target_snr_db = 20.0;

  static NoiseProfile white(double snr_db) { return {NoiseKind::kWhite, std::nullopt, snr_db}; }
  static NoiseProfile recorded(dsp::Waveform source, double snr_db) {
    return {NoiseKind::kRecorded, std::move(source), snr_db};
  }
};

/// Targets at or above this are treated as "no noise".
inline constexpr double kCleanSnrDb = 120.0;
inline constexpr double kMixPeakLimit = 0.99;

inline double snr_db(std::span<const double> clean, std::span<const double> noise) {
  return 10.0 * std::log10(dsp::signal_power(clean) / dsp::signal_power(noise));
}

/// Noise of `length` samples for `profile`, before SNR scaling. Recorded
/// sources loop from a seeded random offset.
inline std::vector<double> noise_samples(const NoiseProfile& profile, std::size_t length, int sample_rate,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> n(length);
  if (profile.kind == NoiseKind::kWhite) {
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : n) v = d(rng);
    return n;
  }
  require(profile.source.has_value(), ErrorCode::kInvalidArgument, "recorded noise profile has no source");
  dsp::Waveform src = *profile.source;
  if (src.sample_rate != sample_rate) src = dsp::resample(src, sample_rate);
  require(!src.empty() && dsp::signal_power(src.samples) > 0.0, ErrorCode::kSilentInput, "noise source is silent");
  std::uniform_int_distribution<std::size_t> offset(0, src.size() - 1);
  std::size_t pos = offset(rng);
  for (double& v : n) {
    v = src.samples[pos];
    if (++pos == src.size()) pos = 0;
  }
  return n;
}

inline dsp::Waveform mix_noise(const dsp::Waveform& clean, const NoiseProfile& profile, std::uint64_t seed) {
  dsp::validate(clean);
  const double ps = dsp::signal_power(clean.samples);
  require(ps > 0.0, ErrorCode::kSilentInput, "cannot mix noise into a silent signal");
  if (profile.target_snr_db >= kCleanSnrDb) return clean;

  auto noise = noise_samples(profile, clean.size(), clean.sample_rate, seed);
  const double pn = dsp::signal_power(noise);
  require(pn > 0.0, ErrorCode::kSilentInput, "noise segment is silent");
  const double gain = std::sqrt(ps / (pn * std::pow(10.0, profile.target_snr_db / 10.0)));
  dsp::Waveform out = clean;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gain * noise[i];
  const double peak = dsp::peak_abs(out.samples);
  if (peak > 1.0) {
    for (double& v : out.samples) v *= kMixPeakLimit / peak;
  }
  return out;
}

/// Speech-shaped babble: several overlapping synthetic talkers with
/// syllable-rate amplitude modulation.
inline dsp::Waveform chatter_noise(double seconds, int sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> f0(95.0, 240.0);
  std::uniform_real_distribution<double> rate(3.0, 6.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  dsp::Waveform out = dsp::synth::silence(seconds, sample_rate);
  for (int talker = 0; talker < 6; ++talker) {
    dsp::synth::VoiceParams p;
    p.f0_hz = f0(rng);
    p.seconds = seconds;
    p.sample_rate = sample_rate;
    p.period_perturbation = 0.02;
    p.amplitude_perturbation = 0.1;
    p.formants_hz = {500.0 + 60.0 * talker, 1500.0 + 150.0 * talker, 2500.0};
    p.seed = rng();
    const auto voice = dsp::synth::vowel(p);
    const double r = rate(rng);
    const double ph = phase(rng);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double env = std::max(0.0, std::sin(2.0 * std::numbers::pi * r * t + ph));
      out.samples[i] += voice.samples[i] * env;
    }
  }
  const double peak = dsp::peak_abs(out.samples);
  if (peak > 0.0) {
    for (double& v : out.samples) v *= 0.5 / peak;
  }
  return out;
}

/// Household background: brown noise, mains hum with harmonics, and sparse
/// clattering transients.
inline dsp::Waveform household_noise(double seconds, int sample_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> white(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  dsp::Waveform out = dsp::synth::silence(seconds, sample_rate);
  double brown = 0.0;
  double click = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    brown = 0.995 * brown + 0.05 * white(rng);
    double hum = 0.0;
    for (int h = 1; h <= 3; ++h) hum += std::sin(2.0 * std::numbers::pi * 50.0 * h * t) / h;
    if (uniform(rng) < 2.0 / sample_rate) click = 1.0;
    click *= 0.999;
    out.samples[i] = brown + 0.1 * hum + 0.6 * click * white(rng);
  }
  const double peak = dsp::peak_abs(out.samples);
  if (peak > 0.0) {
    for (double& v : out.samples) v *= 0.5 / peak;
  }
  return out;
}

}  // namespace voxbm::conditioning
