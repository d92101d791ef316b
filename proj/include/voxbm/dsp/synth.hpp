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

// Deterministic signal generators. These back the bundled fixture corpus
// (sustained vowels, syllable trains, calibration sweep) so that nothing in
// the test suite depends on external recordings.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "voxbm/dsp/waveform.hpp"

namespace voxbm::dsp::synth {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::size_t sample_count(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

inline Waveform silence(double seconds, int sample_rate) {
  return Waveform{std::vector<double>(sample_count(seconds, sample_rate), 0.0), sample_rate};
}

inline Waveform sine(double freq_hz, double seconds, int sample_rate, double amplitude = 1.0, double phase = 0.0) {
  std::vector<double> x(sample_count(seconds, sample_rate));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / sample_rate + phase);
  }
  return Waveform{std::move(x), sample_rate};
}

/// Linear frequency glide with continuous phase.
inline Waveform glide(double f_start, double f_end, double seconds, int sample_rate, double amplitude = 0.8) {
  std::vector<double> x(sample_count(seconds, sample_rate));
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f_start + (f_end - f_start) * t / seconds;
    x[i] = amplitude * std::sin(phase);
    phase += kTwoPi * f / sample_rate;
  }
  return Waveform{std::move(x), sample_rate};
}

inline Waveform sawtooth(double freq_hz, double seconds, int sample_rate, double amplitude = 0.8) {
  std::vector<double> x(sample_count(seconds, sample_rate));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cycles = freq_hz * static_cast<double>(i) / sample_rate;
    x[i] = amplitude * (2.0 * (cycles - std::floor(cycles)) - 1.0);
  }
  return Waveform{std::move(x), sample_rate};
}

inline Waveform white_noise(double seconds, int sample_rate, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> x(sample_count(seconds, sample_rate));
  for (double& v : x) v = dist(rng);
  return Waveform{std::move(x), sample_rate};
}

/// Unit impulses at the cumulative sums of `periods_s` (first pulse at
/// `offset_s`), scaled by `amplitudes` cyclically.
inline Waveform pulse_train(std::span<const double> periods_s, std::span<const double> amplitudes, double seconds,
                            int sample_rate, double offset_s = 0.0) {
  std::vector<double> x(sample_count(seconds, sample_rate), 0.0);
  double t = offset_s;
  std::size_t k = 0;
  while (true) {
    const auto idx = static_cast<std::size_t>(std::llround(t * sample_rate));
    if (idx >= x.size()) break;
    x[idx] = amplitudes.empty() ? 1.0 : amplitudes[k % amplitudes.size()];
    t += periods_s[k % periods_s.size()];
    ++k;
  }
  return Waveform{std::move(x), sample_rate};
}

/// Two-pole resonator applied in place, normalized to unit gain at DC.
inline void resonate(std::vector<double>& x, double freq_hz, double bandwidth_hz, int sample_rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth_hz / sample_rate);
  const double theta = kTwoPi * freq_hz / sample_rate;
  const double a1 = 2.0 * r * std::cos(theta);
  const double a2 = -r * r;
  const double gain = 1.0 - a1 - a2;
  double y1 = 0.0;
  double y2 = 0.0;
  for (double& v : x) {
    const double y = gain * v + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

struct VoiceParams {
  double f0_hz = 120.0;
  double seconds = 1.0;
  int sample_rate = 16000;
  /// Relative cycle-to-cycle period perturbation (uniform, +/- this fraction).
  double period_perturbation = 0.0;
  /// Relative cycle-to-cycle amplitude perturbation (uniform, +/- this fraction).
  double amplitude_perturbation = 0.0;
  std::vector<double> formants_hz = {700.0, 1220.0, 2600.0};
  std::vector<double> bandwidths_hz = {80.0, 90.0, 120.0};
  /// Corner of the one-pole source tilt (-6 dB/octave above it); 0 disables.
  double tilt_corner_hz = 100.0;
  double peak = 0.5;
  std::uint64_t seed = 1;
};

/// Glottal pulse train (smoothed impulses) through a one-pole spectral tilt
/// and cascaded formant resonators, normalized to `peak`. The whole filter is
/// all-pole.
inline Waveform vowel(const VoiceParams& p) {
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> jitter(-p.period_perturbation, p.period_perturbation);
  std::uniform_real_distribution<double> shimmer(-p.amplitude_perturbation, p.amplitude_perturbation);
  std::vector<double> x(sample_count(p.seconds, p.sample_rate), 0.0);
  const double t0 = 1.0 / p.f0_hz;
  double t = 0.002;
  while (true) {
    const double pos = t * p.sample_rate;
    const auto idx = static_cast<std::size_t>(std::floor(pos));
    if (idx + 1 >= x.size()) break;
    const double frac = pos - static_cast<double>(idx);
    const double amp = 1.0 + shimmer(rng);
    x[idx] += amp * (1.0 - frac);
    x[idx + 1] += amp * frac;
    t += t0 * (1.0 + jitter(rng));
  }
  if (p.tilt_corner_hz > 0.0) {
    const double a = std::exp(-kTwoPi * p.tilt_corner_hz / p.sample_rate);
    double y = 0.0;
    for (double& v : x) v = y = (1.0 - a) * v + a * y;
  }
  for (std::size_t i = 0; i < std::min(p.formants_hz.size(), p.bandwidths_hz.size()); ++i) {
    resonate(x, p.formants_hz[i], p.bandwidths_hz[i], p.sample_rate);
  }
  const double peak = peak_abs(x);
  if (peak > 0.0) {
    for (double& v : x) v *= p.peak / peak;
  }
  return Waveform{std::move(x), p.sample_rate};
}

/// Regularly spaced tone bursts with raised-cosine edges, as in a
/// syllable-repetition task. `onsets_s` gives each burst start.
inline Waveform bursts(std::span<const double> onsets_s, double burst_s, double seconds, int sample_rate,
                       double carrier_hz = 220.0, double amplitude = 0.5) {
  std::vector<double> x(sample_count(seconds, sample_rate), 0.0);
  const std::size_t len = sample_count(burst_s, sample_rate);
  const std::size_t ramp = std::max<std::size_t>(1, len / 5);
  for (double onset : onsets_s) {
    const auto start = sample_count(onset, sample_rate);
    for (std::size_t i = 0; i < len && start + i < x.size(); ++i) {
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
      if (i + ramp > len) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(len - i) / ramp);
      x[start + i] = amplitude * env * std::sin(kTwoPi * carrier_hz * static_cast<double>(i) / sample_rate);
    }
  }
  return Waveform{std::move(x), sample_rate};
}

inline std::vector<double> regular_onsets(int count, double interval_s, double first_s = 0.0) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(first_s + interval_s * i);
  return out;
}

/// Exponential sine sweep, used as calibration program material.
inline Waveform log_sweep(double f_start, double f_end, double seconds, int sample_rate, double amplitude = 0.5) {
  std::vector<double> x(sample_count(seconds, sample_rate));
  const double k = std::log(f_end / f_start);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double phase = kTwoPi * f_start * seconds / k * (std::exp(t * k / seconds) - 1.0);
    x[i] = amplitude * std::sin(phase);
  }
  return Waveform{std::move(x), sample_rate};
}

}  // namespace voxbm::dsp::synth
