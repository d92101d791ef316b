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

// Voice quality and prosody measures derived from a pitch track: harmonicity,
// noise ratios, formants, cepstral peak prominence, pitch and intensity
// statistics, and maximum phonation time.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/Polynomials>

#include "voxbm/biomarkers/pitch.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/dsp/analysis.hpp"
#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/resample.hpp"
#include "voxbm/dsp/waveform.hpp"
#include "voxbm/dsp/window.hpp"

namespace voxbm::biomarkers {

/// Harmonicity of one autocorrelation value, 10 log10(r / (1 - r)).
inline double hnr_from_r(double r) {
  const double c = std::clamp(r, 1e-6, 1.0 - 1e-6);
  return 10.0 * std::log10(c / (1.0 - c));
}

inline double hnr(const dsp::Waveform& w, const PitchTrack& pitch) {
  require(pitch.voiced_count() > 0, ErrorCode::kNoVoicedRegion, "pitch track has no voiced frames");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pitch.size(); ++t) {
    if (!pitch.voiced(t)) continue;
    const std::size_t start = t * pitch.hop;
    if (start + pitch.frame_length > w.size()) break;
    const std::span<const double> frame(w.samples.data() + start, pitch.frame_length);
    const auto r = dsp::autocorr_normalized(frame, dsp::WindowKind::kHann);
    const double lag = pitch.sample_rate / pitch.f0[t];
    acc += hnr_from_r(refine_lag(r, lag).second);
    ++n;
  }
  require(n > 0, ErrorCode::kNoVoicedRegion, "no complete voiced frame");
  return acc / static_cast<double>(n);
}

struct NoiseRatios {
  double nhr_ratio = 0.0;
  double nne_db = 0.0;
};

inline NoiseRatios noise_ratios(double hnr_db) {
  require(std::isfinite(hnr_db), ErrorCode::kInvalidArgument, "hnr must be finite");
  return {std::pow(10.0, -hnr_db / 10.0), -10.0 * std::log10(1.0 + std::pow(10.0, hnr_db / 10.0))};
}

// ---------------------------------------------------------------------------
// Formants

struct FormantConfig {
  int analysis_rate = 10000;
  int lpc_order = 10;
  double frame_s = 0.025;
  double hop_s = 0.010;
  double preemphasis_from_hz = 50.0;
  double max_bandwidth_hz = 400.0;
  double min_voiced_s = 0.1;
};

struct Formants {
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  double f3_hz = 0.0;
};

/// Roots of the monic polynomial z^n + c[0] z^(n-1) + ... + c[n-1]
/// (companion-matrix eigenvalues).
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c) {
  const auto n = static_cast<Eigen::Index>(c.size());
  Eigen::VectorXd ascending(n + 1);
  for (Eigen::Index k = 0; k < n; ++k) ascending[k] = c[static_cast<std::size_t>(n - 1 - k)];
  ascending[n] = 1.0;
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(ascending);
  const auto& roots = solver.roots();
  return std::vector<std::complex<double>>(roots.data(), roots.data() + roots.size());
}

/// Candidate formants (frequency ascending) of one pre-emphasized frame.
inline std::vector<double> frame_formants(std::span<const double> frame, int sample_rate, const FormantConfig& cfg) {
  const auto lpc = dsp::lpc_burg(frame, cfg.lpc_order);
  std::vector<double> poly(lpc.coefficients.size());
  for (std::size_t k = 0; k < poly.size(); ++k) poly[k] = -lpc.coefficients[k];
  std::vector<double> out;
  for (const auto& z : polynomial_roots(poly)) {
    if (z.imag() <= 0.0) continue;
    const double f = std::arg(z) * sample_rate / (2.0 * std::numbers::pi);
    const double bw = -std::log(std::abs(z)) * sample_rate / std::numbers::pi;
    if (f > 50.0 && f < sample_rate / 2.0 - 50.0 && bw < cfg.max_bandwidth_hz) out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Formants formants(const dsp::Waveform& w, const PitchTrack& pitch, const FormantConfig& cfg = {}) {
  require(w.duration_seconds() >= cfg.min_voiced_s, ErrorCode::kTooShort, "formant analysis needs at least 0.1 s");
  const double voiced_s = static_cast<double>(pitch.voiced_count()) * pitch.hop_s;
  require(voiced_s >= cfg.min_voiced_s, ErrorCode::kFormantsUnresolved, "less than 0.1 s of voiced audio");

  auto x = dsp::resample(w, cfg.analysis_rate);
  const double alpha = std::exp(-2.0 * std::numbers::pi * cfg.preemphasis_from_hz / cfg.analysis_rate);
  for (std::size_t i = x.samples.size(); i-- > 1;) x.samples[i] -= alpha * x.samples[i - 1];

  const auto frames = dsp::window_frames(x, cfg.frame_s, cfg.hop_s, dsp::WindowKind::kHann);
  std::vector<double> f1, f2, f3;
  std::size_t voiced = 0;
  for (std::size_t k = 0; k < frames.frames.size(); ++k) {
    const double t = frames.centre_time(k);
    const auto nearest = static_cast<std::ptrdiff_t>(std::llround((t - pitch.times.front()) / pitch.hop_s));
    if (nearest < 0 || nearest >= static_cast<std::ptrdiff_t>(pitch.size())) continue;
    if (!pitch.voiced(static_cast<std::size_t>(nearest))) continue;
    ++voiced;
    std::vector<double> cand;
    try {
      cand = frame_formants(frames.frames[k], cfg.analysis_rate, cfg);
    } catch (const Error&) {
      continue;
    }
    if (cand.size() < 3) continue;
    f1.push_back(cand[0]);
    f2.push_back(cand[1]);
    f3.push_back(cand[2]);
  }
  require(voiced > 0 && 2 * f1.size() > voiced, ErrorCode::kFormantsUnresolved,
          "fewer than three resolved formants in most voiced frames");
  return {stats::median(f1), stats::median(f2), stats::median(f3)};
}

inline Formants formants(const dsp::Waveform& w) { return formants(w, track_pitch(w)); }

// ---------------------------------------------------------------------------
// Cepstral peak prominence

struct CppConfig {
  double frame_s = 0.040;
  double hop_s = 0.010;
  double min_f0_hz = 60.0;
  double max_f0_hz = 300.0;
  int time_smoothing = 11;      // frames
  int quefrency_smoothing = 5;  // bins
};

/// Smoothed cepstral peak prominence in dB, averaged over frames. Silent
/// frames are skipped; all-silent input gives 0.
inline double cpp(const dsp::Waveform& w, const CppConfig& cfg = {}) {
  require(w.duration_seconds() >= 0.2, ErrorCode::kTooShort, "cepstral analysis needs at least 0.2 s");
  const int sr = w.sample_rate;
  const std::size_t n = dsp::next_power_of_two(dsp::seconds_to_samples(cfg.frame_s, sr));
  const std::size_t hop = std::max<std::size_t>(1, dsp::seconds_to_samples(cfg.hop_s, sr));
  const auto window = dsp::make_window(dsp::WindowKind::kHann, n);
  const std::size_t frames = dsp::frame_count(w.size(), n, hop);
  require(frames > 0, ErrorCode::kTooShort, "signal shorter than one cepstral frame");

  const auto q_lo = static_cast<std::size_t>(std::floor(sr / cfg.max_f0_hz));
  const auto q_hi = std::min(n / 2 - 1, static_cast<std::size_t>(std::ceil(sr / cfg.min_f0_hz)));

  std::vector<std::vector<double>> power;  // squared cepstrum, empty for silent frames
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < frames; ++t) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      buf[i] = w.samples[t * hop + i] * window[i];
      any = any || buf[i] != 0.0;
    }
    if (!any) {
      power.emplace_back();
      continue;
    }
    auto c = dsp::real_cepstrum(buf);
    c.resize(n / 2);
    for (double& v : c) v *= v;
    power.push_back(std::move(c));
  }

  const int th = cfg.time_smoothing / 2;
  const int qh = cfg.quefrency_smoothing / 2;
  std::vector<double> smoothed(n / 2);
  std::vector<double> line_x, line_y;
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (power[t].empty()) continue;
    std::fill(smoothed.begin(), smoothed.end(), 0.0);
    int count = 0;
    for (int d = -th; d <= th; ++d) {
      const auto u = static_cast<std::ptrdiff_t>(t) + d;
      if (u < 0 || u >= static_cast<std::ptrdiff_t>(frames) || power[static_cast<std::size_t>(u)].empty()) continue;
      const auto& p = power[static_cast<std::size_t>(u)];
      for (std::size_t q = 0; q < smoothed.size(); ++q) smoothed[q] += p[q];
      ++count;
    }
    line_x.clear();
    line_y.clear();
    for (std::size_t q = q_lo; q <= q_hi; ++q) {
      double s = 0.0;
      int m = 0;
      for (int d = -qh; d <= qh; ++d) {
        const auto k = static_cast<std::ptrdiff_t>(q) + d;
        if (k < 1 || k >= static_cast<std::ptrdiff_t>(smoothed.size())) continue;
        s += smoothed[static_cast<std::size_t>(k)];
        ++m;
      }
      const double v = s / (m * count);
      line_x.push_back(static_cast<double>(q));
      line_y.push_back(10.0 * std::log10(std::max(v, 1e-30)));
    }
    const auto fit = stats::fit_line(line_x, line_y);
    double best = -1e300;
    for (std::size_t i = 0; i < line_x.size(); ++i) {
      best = std::max(best, line_y[i] - (fit.intercept + fit.slope * line_x[i]));
    }
    acc += best;
    ++used;
  }
  return used ? acc / static_cast<double>(used) : 0.0;
}

// ---------------------------------------------------------------------------
// Prosody

struct ProsodyConfig {
  double intensity_frame_s = 0.040;
  double intensity_hop_s = 0.010;
  double silence_gate_db = 50.0;  // below the loudest frame
};

struct ProsodyStats {
  double sff_hz = 0.0;
  double pitch_range_semitones = 0.0;
  double intensity_mean_db = 0.0;
  double intensity_range_db = 0.0;
};

/// Frame intensities in dBFS over non-silent frames.
inline std::vector<double> intensity_contour(const dsp::Waveform& w, const ProsodyConfig& cfg = {}) {
  const std::size_t n = dsp::seconds_to_samples(cfg.intensity_frame_s, w.sample_rate);
  const std::size_t hop = std::max<std::size_t>(1, dsp::seconds_to_samples(cfg.intensity_hop_s, w.sample_rate));
  const std::size_t frames = dsp::frame_count(w.size(), n, hop);
  std::vector<double> db(frames);
  for (std::size_t t = 0; t < frames; ++t) db[t] = dsp::rms_db(std::span<const double>(w.samples.data() + t * hop, n));
  if (db.empty()) return db;
  const double top = *std::max_element(db.begin(), db.end());
  std::vector<double> kept;
  for (double v : db) {
    if (v > dsp::kIntensityFloorDb && v >= top - cfg.silence_gate_db) kept.push_back(v);
  }
  return kept;
}

inline ProsodyStats prosody_stats(const PitchTrack& pitch, const dsp::Waveform& w, const ProsodyConfig& cfg = {}) {
  const auto f0 = pitch.voiced_f0();
  require(!f0.empty(), ErrorCode::kNoVoicedRegion, "pitch track has no voiced frames");
  ProsodyStats s;
  s.sff_hz = stats::mean(f0);
  s.pitch_range_semitones = 12.0 * std::log2(stats::percentile(f0, 95.0) / stats::percentile(f0, 5.0));
  const auto level = intensity_contour(w, cfg);
  require(!level.empty(), ErrorCode::kSilentInput, "no frame above the silence gate");
  s.intensity_mean_db = stats::mean(level);
  s.intensity_range_db = stats::percentile(level, 95.0) - stats::percentile(level, 5.0);
  return s;
}

// ---------------------------------------------------------------------------
// Maximum phonation time

inline double mpt(const PitchTrack& pitch) {
  double best = 0.0;
  for (const auto& [a, b] : voiced_runs(pitch)) {
    best = std::max(best, pitch.times[b] - pitch.times[a] + pitch.hop_s);
  }
  return best;
}

inline double mpt(const dsp::Waveform& w, const PitchConfig& cfg = {}) {
  if (w.duration_seconds() < 3.0 / cfg.floor_hz) return 0.0;
  return mpt(track_pitch(w, cfg));
}

}  // namespace voxbm::biomarkers
