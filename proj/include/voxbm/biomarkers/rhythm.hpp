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

// Syllable onset detection on a short-time energy envelope, and the
// diadochokinetic and speech-rate measures computed from the onsets.

#include <algorithm>
#include <cmath>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::biomarkers {

struct OnsetConfig {
  double window_s = 0.010;
  double step_s = 0.001;
  int smoothing = 5;                // envelope points
  double enter_fraction = 0.30;     // of the envelope maximum
  double exit_fraction = 0.15;
  double min_separation_s = 0.060;
};

/// Syllable onset times in seconds: upward crossings of the entry threshold,
/// linearly interpolated between envelope points.
inline std::vector<double> syllable_onsets(const dsp::Waveform& w, const OnsetConfig& cfg = {}) {
  const int sr = w.sample_rate;
  const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window_s * sr)));
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.step_s * sr)));
  if (w.size() < win) return {};

  std::vector<double> env;
  for (std::size_t s = 0; s + win <= w.size(); s += step) {
    double acc = 0.0;
    for (std::size_t i = s; i < s + win; ++i) acc += w.samples[i] * w.samples[i];
    env.push_back(std::sqrt(acc / static_cast<double>(win)));
  }
  const int h = cfg.smoothing / 2;
  std::vector<double> smooth(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    double acc = 0.0;
    int m = 0;
    for (int d = -h; d <= h; ++d) {
      const auto k = static_cast<std::ptrdiff_t>(i) + d;
      if (k < 0 || k >= static_cast<std::ptrdiff_t>(env.size())) continue;
      acc += env[static_cast<std::size_t>(k)];
      ++m;
    }
    smooth[i] = acc / m;
  }
  const double top = *std::max_element(smooth.begin(), smooth.end());
  if (top <= 0.0) return {};
  const double enter = cfg.enter_fraction * top;
  const double exit = cfg.exit_fraction * top;

  auto time_of = [&](double index) { return (index * static_cast<double>(step) + 0.5 * static_cast<double>(win)) / sr; };
  std::vector<double> onsets;
  bool inside = smooth[0] >= enter;
  for (std::size_t i = 1; i < smooth.size(); ++i) {
    if (!inside && smooth[i - 1] < enter && smooth[i] >= enter) {
      const double frac = (enter - smooth[i - 1]) / (smooth[i] - smooth[i - 1]);
      const double t = time_of(static_cast<double>(i - 1) + frac);
      if (onsets.empty() || t - onsets.back() >= cfg.min_separation_s) onsets.push_back(t);
      inside = true;
    } else if (inside && smooth[i] < exit) {
      inside = false;
    }
  }
  return onsets;
}

struct DdkMetrics {
  double ddk_rate_per_s = 0.0;
  double ddk_cv = 0.0;
  std::size_t syllables = 0;
};

inline DdkMetrics ddk_from_onsets(const std::vector<double>& onsets) {
  require(onsets.size() >= 3, ErrorCode::kTooFewSyllables, "fewer than 3 syllable onsets");
  std::vector<double> intervals;
  for (std::size_t i = 1; i < onsets.size(); ++i) intervals.push_back(onsets[i] - onsets[i - 1]);
  DdkMetrics m;
  m.syllables = onsets.size();
  m.ddk_rate_per_s = static_cast<double>(onsets.size() - 1) / (onsets.back() - onsets.front());
  m.ddk_cv = stats::stddev(intervals) / stats::mean(intervals);
  return m;
}

inline DdkMetrics ddk_metrics(const dsp::Waveform& w, const OnsetConfig& cfg = {}) {
  require(w.duration_seconds() >= 1.0, ErrorCode::kTooShort, "syllable-rate analysis needs at least 1 s");
  return ddk_from_onsets(syllable_onsets(w, cfg));
}

struct SpeechRate {
  double syllables_per_s = 0.0;
  std::size_t syllables = 0;
  bool too_few_syllables = false;
};

/// Onsets over the whole file duration, pauses included. Never throws on
/// sparse input; the flag reports fewer than 3 onsets.
inline SpeechRate speech_rate(const dsp::Waveform& w, const OnsetConfig& cfg = {}) {
  SpeechRate r;
  const double duration = w.duration_seconds();
  if (duration <= 0.0) {
    r.too_few_syllables = true;
    return r;
  }
  r.syllables = syllable_onsets(w, cfg).size();
  r.syllables_per_s = static_cast<double>(r.syllables) / duration;
  r.too_few_syllables = r.syllables < 3;
  return r;
}

}  // namespace voxbm::biomarkers
