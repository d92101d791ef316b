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

// Autocorrelation pitch tracker.
//
// Each frame contributes up to `max_candidates` voiced candidates (local
// maxima of the window-normalized autocorrelation inside the allowed lag
// range) plus one unvoiced candidate. A Viterbi pass then picks the path with
// the highest total strength after subtracting octave-jump and
// voiced/unvoiced transition costs. Candidate strengths favour higher
// frequencies slightly (octave cost) to suppress subharmonic errors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/analysis.hpp"
#include "voxbm/dsp/waveform.hpp"
#include "voxbm/dsp/window.hpp"

namespace voxbm::biomarkers {

struct PitchConfig {
  double floor_hz = 75.0;
  double ceiling_hz = 600.0;
  double frame_s = 0.040;
  double hop_s = 0.010;
  double voicing_threshold = 0.45;
  double silence_threshold = 0.03;
  double octave_cost = 0.01;
  double octave_jump_cost = 0.35;
  double voiced_unvoiced_cost = 0.14;
  int max_candidates = 15;
};

struct PitchTrack {
  std::vector<double> times;     // frame centres, seconds
  std::vector<double> f0;        // Hz, 0 = unvoiced
  std::vector<double> strength;  // in [0, 1]
  double floor_hz = 0.0;
  double ceiling_hz = 0.0;
  double hop_s = 0.0;
  std::size_t frame_length = 0;  // samples
  std::size_t hop = 0;           // samples
  int sample_rate = 0;

  std::size_t size() const { return f0.size(); }
  bool voiced(std::size_t t) const { return f0[t] > 0.0; }
  std::size_t voiced_count() const {
    return static_cast<std::size_t>(std::count_if(f0.begin(), f0.end(), [](double f) { return f > 0.0; }));
  }
  std::vector<double> voiced_f0() const {
    std::vector<double> out;
    for (double f : f0) {
      if (f > 0.0) out.push_back(f);
    }
    return out;
  }
};

namespace detail {

struct Candidate {
  double f0 = 0.0;  // 0 = unvoiced
  double strength = 0.0;
  double r = 0.0;
};

inline std::size_t pitch_frame_length(const PitchConfig& cfg, int sample_rate) {
  const double seconds = std::max(cfg.frame_s, 3.0 / cfg.floor_hz);
  return dsp::seconds_to_samples(seconds, sample_rate);
}

}  // namespace detail

/// Interpolated peak of `r` near `lag` (searched within +/- `radius` lags).
/// Returns {refined lag, peak value}.
inline std::pair<double, double> refine_lag(const std::vector<double>& r, double lag, int radius = 2) {
  const auto centre = static_cast<std::ptrdiff_t>(std::llround(lag));
  std::ptrdiff_t best = -1;
  for (std::ptrdiff_t l = centre - radius; l <= centre + radius; ++l) {
    if (l < 1 || l + 1 >= static_cast<std::ptrdiff_t>(r.size())) continue;
    if (best < 0 || r[static_cast<std::size_t>(l)] > r[static_cast<std::size_t>(best)]) best = l;
  }
  if (best < 0) return {lag, 0.0};
  const auto [offset, value] = dsp::parabolic_peak(r, static_cast<std::size_t>(best));
  return {static_cast<double>(best) + offset, value};
}

inline PitchTrack track_pitch(const dsp::Waveform& w, const PitchConfig& cfg = {}) {
  require(w.sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  require(cfg.floor_hz > 0.0 && cfg.floor_hz < cfg.ceiling_hz && cfg.ceiling_hz < w.sample_rate / 2.0,
          ErrorCode::kInvalidArgument, "pitch range must satisfy 0 < floor < ceiling < Nyquist");
  require(w.duration_seconds() >= 3.0 / cfg.floor_hz, ErrorCode::kTooShort,
          "waveform shorter than three periods of the pitch floor");

  const int sr = w.sample_rate;
  const std::size_t n = detail::pitch_frame_length(cfg, sr);
  const std::size_t hop = std::max<std::size_t>(1, dsp::seconds_to_samples(cfg.hop_s, sr));
  const std::size_t frames = dsp::frame_count(w.size(), n, hop);
  require(frames > 0, ErrorCode::kTooShort, "waveform shorter than one analysis frame");

  const double global_peak = dsp::peak_abs(w.samples);
  const auto min_lag = static_cast<std::size_t>(std::floor(sr / cfg.ceiling_hz));
  const auto max_lag = std::min(static_cast<std::size_t>(std::ceil(sr / cfg.floor_hz)), n / 2 - 1);

  std::vector<std::vector<detail::Candidate>> cands(frames);
  std::vector<double> best_r(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::span<const double> frame(w.samples.data() + t * hop, n);
    double mean = 0.0;
    for (double v : frame) mean += v;
    mean /= static_cast<double>(n);
    double local_peak = 0.0;
    for (double v : frame) local_peak = std::max(local_peak, std::abs(v - mean));

    const double rel = global_peak > 0.0 ? local_peak / global_peak : 0.0;
    const double unvoiced_strength =
        cfg.voicing_threshold +
        std::max(0.0, 2.0 - rel / (cfg.silence_threshold / (1.0 + cfg.voicing_threshold)));
    cands[t].push_back({0.0, unvoiced_strength, 0.0});
    if (local_peak <= 0.0) continue;

    const auto r = dsp::autocorr_normalized(frame, dsp::WindowKind::kHann);
    std::vector<detail::Candidate> voiced;
    for (std::size_t lag = std::max<std::size_t>(min_lag, 2); lag <= max_lag && lag + 1 < r.size(); ++lag) {
      if (!(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])) continue;
      if (r[lag] < 0.5 * cfg.voicing_threshold) continue;
      const auto [offset, value] = dsp::parabolic_peak(r, lag);
      const double period = static_cast<double>(lag) + offset;
      const double f = sr / period;
      if (f < cfg.floor_hz || f > cfg.ceiling_hz) continue;
      best_r[t] = std::max(best_r[t], std::min(value, 1.0));
      if (value < cfg.voicing_threshold) continue;
      const double strength = value - cfg.octave_cost * std::log2(cfg.floor_hz * period / sr);
      voiced.push_back({f, strength, std::min(value, 1.0)});
    }
    std::sort(voiced.begin(), voiced.end(), [](const auto& a, const auto& b) { return a.strength > b.strength; });
    if (voiced.size() > static_cast<std::size_t>(cfg.max_candidates)) voiced.resize(static_cast<std::size_t>(cfg.max_candidates));
    cands[t].insert(cands[t].end(), voiced.begin(), voiced.end());
  }

  // Viterbi over candidates; costs scale with hop as in the conventional
  // 10 ms reference step.
  const double time_scale = 0.01 / (static_cast<double>(hop) / sr);
  auto transition = [&](const detail::Candidate& a, const detail::Candidate& b) {
    const bool va = a.f0 > 0.0;
    const bool vb = b.f0 > 0.0;
    if (!va && !vb) return 0.0;
    if (va != vb) return cfg.voiced_unvoiced_cost * time_scale;
    return cfg.octave_jump_cost * std::abs(std::log2(a.f0 / b.f0)) * time_scale;
  };
  std::vector<std::vector<double>> score(frames);
  std::vector<std::vector<std::size_t>> back(frames);
  score[0].resize(cands[0].size());
  back[0].assign(cands[0].size(), 0);
  for (std::size_t j = 0; j < cands[0].size(); ++j) score[0][j] = cands[0][j].strength;
  for (std::size_t t = 1; t < frames; ++t) {
    score[t].assign(cands[t].size(), -std::numeric_limits<double>::infinity());
    back[t].assign(cands[t].size(), 0);
    for (std::size_t j = 0; j < cands[t].size(); ++j) {
      for (std::size_t i = 0; i < cands[t - 1].size(); ++i) {
        const double s = score[t - 1][i] - transition(cands[t - 1][i], cands[t][j]) + cands[t][j].strength;
        if (s > score[t][j]) {
          score[t][j] = s;
          back[t][j] = i;
        }
      }
    }
  }

  PitchTrack track;
  track.floor_hz = cfg.floor_hz;
  track.ceiling_hz = cfg.ceiling_hz;
  track.hop_s = static_cast<double>(hop) / sr;
  track.frame_length = n;
  track.hop = hop;
  track.sample_rate = sr;
  track.times.resize(frames);
  track.f0.resize(frames);
  track.strength.resize(frames);
  std::size_t j = static_cast<std::size_t>(
      std::max_element(score[frames - 1].begin(), score[frames - 1].end()) - score[frames - 1].begin());
  for (std::size_t t = frames; t-- > 0;) {
    const auto& c = cands[t][j];
    track.times[t] = (static_cast<double>(t * hop) + 0.5 * static_cast<double>(n)) / sr;
    track.f0[t] = c.f0;
    track.strength[t] = c.f0 > 0.0 ? c.r : best_r[t];
    j = back[t][j];
  }
  return track;
}

/// Start/end frame indices (inclusive) of contiguous voiced runs.
inline std::vector<std::pair<std::size_t, std::size_t>> voiced_runs(const PitchTrack& track) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t t = 0;
  while (t < track.size()) {
    if (!track.voiced(t)) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < track.size() && track.voiced(t)) ++t;
    runs.emplace_back(start, t - 1);
  }
  return runs;
}

}  // namespace voxbm::biomarkers
