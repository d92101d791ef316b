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

// Glottal cycle marking and the cycle-to-cycle perturbation measures built on
// it. Marks are grouped into runs: within a run every consecutive difference
// is a plausible period, and differences are never taken across runs.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "voxbm/biomarkers/pitch.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::biomarkers {

struct PeriodMarks {
  std::vector<std::vector<double>> runs;  // seconds, strictly increasing

  std::vector<double> marks() const {
    std::vector<double> out;
    for (const auto& r : runs) out.insert(out.end(), r.begin(), r.end());
    return out;
  }
  std::vector<std::vector<double>> periods() const {
    std::vector<std::vector<double>> out;
    for (const auto& r : runs) {
      std::vector<double> p;
      for (std::size_t i = 1; i < r.size(); ++i) p.push_back(r[i] - r[i - 1]);
      if (!p.empty()) out.push_back(std::move(p));
    }
    return out;
  }
  std::size_t period_count() const {
    std::size_t n = 0;
    for (const auto& r : runs) n += r.size() > 1 ? r.size() - 1 : 0;
    return n;
  }

  static PeriodMarks from_periods(std::span<const double> periods_s, double start_s = 0.0) {
    PeriodMarks m;
    m.runs.emplace_back();
    double t = start_s;
    m.runs.back().push_back(t);
    for (double p : periods_s) m.runs.back().push_back(t += p);
    return m;
  }
};

namespace detail {

/// Voiced stretches of the signal in samples: the union of the analysis
/// windows of each run of voiced frames.
inline std::vector<std::pair<std::size_t, std::size_t>> voiced_spans(const PitchTrack& pitch, std::size_t length) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& [a, b] : voiced_runs(pitch)) {
    const std::size_t start = a * pitch.hop;
    const std::size_t end = std::min(length, b * pitch.hop + pitch.frame_length);
    spans.emplace_back(start, end);
  }
  return spans;
}

/// f0 of the voiced frame nearest to time t.
inline double local_f0(const PitchTrack& pitch, double t) {
  double best = 0.0;
  double dist = 1e300;
  for (std::size_t i = 0; i < pitch.size(); ++i) {
    if (!pitch.voiced(i)) continue;
    const double d = std::abs(pitch.times[i] - t);
    if (d < dist) {
      dist = d;
      best = pitch.f0[i];
    }
  }
  return best;
}

inline std::size_t argmax_in(const std::vector<double>& x, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  for (std::size_t i = lo; i < hi; ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

}  // namespace detail

inline PeriodMarks mark_periods(const dsp::Waveform& w, const PitchTrack& pitch) {
  require(pitch.voiced_count() > 0, ErrorCode::kNoVoicedRegion, "pitch track has no voiced frames");
  const double sr = w.sample_rate;
  const double min_period = 1.0 / pitch.ceiling_hz;
  const double max_period = 1.0 / pitch.floor_hz;

  PeriodMarks out;
  for (const auto& [start, end] : detail::voiced_spans(pitch, w.size())) {
    if (end <= start + 2) continue;
    // One polarity per region: whichever extreme is larger.
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      hi = std::max(hi, w.samples[i]);
      lo = std::min(lo, w.samples[i]);
    }
    const double sign = hi >= -lo ? 1.0 : -1.0;
    std::vector<double> x(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                          w.samples.begin() + static_cast<std::ptrdiff_t>(end));
    for (double& v : x) v *= sign;
    const double region_peak = *std::max_element(x.begin(), x.end());
    if (region_peak <= 0.0) continue;

    auto refine = [&](std::size_t i) {
      return (static_cast<double>(start + i) + dsp::parabolic_peak(x, i).first) / sr;
    };
    auto to_index = [&](double t) {
      return static_cast<std::ptrdiff_t>(std::llround(t * sr)) - static_cast<std::ptrdiff_t>(start);
    };

    // The span includes whole analysis windows, so it can begin in silence.
    // Start from the first strong excursion.
    std::size_t onset = 0;
    while (x[onset] < 0.5 * region_peak) ++onset;
    const double t0 = std::clamp(1.0 / detail::local_f0(pitch, static_cast<double>(start + onset) / sr), min_period,
                                 max_period);
    const std::size_t first_hi = std::min(x.size(), onset + static_cast<std::size_t>(std::ceil(t0 * sr)) + 1);
    const std::size_t idx = detail::argmax_in(x, onset, first_hi);

    std::vector<double> run{refine(idx)};
    double amp = x[idx];
    while (true) {
      const double t = run.back();
      const double period = std::clamp(1.0 / detail::local_f0(pitch, t), min_period, max_period);
      const double lo_t = t + std::max(0.7 * period, min_period);
      const double hi_t = t + std::min(1.3 * period, max_period);
      const auto a = std::max<std::ptrdiff_t>(0, to_index(lo_t));
      const auto b = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x.size()), to_index(hi_t) + 1);
      if (a >= b) break;
      std::size_t next = detail::argmax_in(x, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      if (x[next] <= 0.1 * amp) {
        // Voicing faded out inside the span; close this run and look for the
        // next strong peak to start another.
        if (run.size() > 1) out.runs.push_back(std::move(run));
        run.clear();
        const std::size_t from = static_cast<std::size_t>(b);
        std::size_t resume = from;
        while (resume < x.size() && x[resume] < 0.5 * region_peak) ++resume;
        if (resume >= x.size()) break;
        const std::size_t stop = std::min(x.size(), resume + static_cast<std::size_t>(std::ceil(period * sr)));
        const std::size_t peak = detail::argmax_in(x, resume, stop);
        run.push_back(refine(peak));
        amp = x[peak];
        continue;
      }
      // A strong intermediate peak means the track is sitting on a
      // subharmonic; take the earlier cycle instead.
      const auto mid_a = std::max<std::ptrdiff_t>(0, to_index(t + min_period));
      const auto mid_b = std::min<std::ptrdiff_t>(a, to_index(t + 0.7 * period));
      if (mid_a < mid_b) {
        const std::size_t mid = detail::argmax_in(x, static_cast<std::size_t>(mid_a), static_cast<std::size_t>(mid_b));
        const bool is_peak = mid > 0 && mid + 1 < x.size() && x[mid] >= x[mid - 1] && x[mid] >= x[mid + 1];
        if (is_peak && x[mid] >= 0.7 * x[next]) next = mid;
      }
      const double tn = refine(next);
      if (tn - t < min_period || tn - t > max_period) break;
      run.push_back(tn);
      amp = x[next];
    }
    if (run.size() > 1) out.runs.push_back(std::move(run));
  }
  require(out.period_count() > 0, ErrorCode::kNoVoicedRegion, "no glottal cycles found in voiced regions");
  return out;
}

namespace detail {

/// mean over i of |v_i - mean(v_{i-h..i+h})| across all runs that are long
/// enough, or nullopt if none is.
inline std::optional<double> perturbation_quotient(const std::vector<std::vector<double>>& runs, std::size_t k) {
  const std::size_t h = k / 2;
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& v : runs) {
    if (v.size() < k) continue;
    for (std::size_t i = h; i + h < v.size(); ++i) {
      double avg = 0.0;
      for (std::size_t j = i - h; j <= i + h; ++j) avg += v[j];
      avg /= static_cast<double>(k);
      acc += std::abs(v[i] - avg);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return acc / static_cast<double>(n);
}

inline std::pair<double, std::size_t> mean_abs_successive(const std::vector<std::vector<double>>& runs) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& v : runs) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      acc += std::abs(v[i] - v[i - 1]);
      ++n;
    }
  }
  return {n ? acc / static_cast<double>(n) : 0.0, n};
}

inline double pooled_mean(const std::vector<std::vector<double>>& runs) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& v : runs) {
    for (double x : v) acc += x;
    n += v.size();
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

}  // namespace detail

struct JitterMetrics {
  double local_pct = 0.0;
  double abs_s = 0.0;
  std::optional<double> rap_pct;
  std::optional<double> ppq5_pct;
  std::optional<double> ddp_pct;
};

inline JitterMetrics jitter_metrics(const PeriodMarks& marks) {
  const auto periods = marks.periods();
  require(marks.period_count() >= 3, ErrorCode::kTooFewPeriods, "jitter needs at least 3 periods");
  const double mean_t = detail::pooled_mean(periods);
  const auto [diff, n] = detail::mean_abs_successive(periods);
  require(n > 0, ErrorCode::kTooFewPeriods, "no run contains two consecutive periods");

  JitterMetrics j;
  j.abs_s = diff;
  j.local_pct = 100.0 * diff / mean_t;
  if (auto rap = detail::perturbation_quotient(periods, 3)) {
    j.rap_pct = 100.0 * *rap / mean_t;
    j.ddp_pct = 3.0 * *j.rap_pct;
  }
  if (auto ppq = detail::perturbation_quotient(periods, 5)) j.ppq5_pct = 100.0 * *ppq / mean_t;
  return j;
}

struct ShimmerMetrics {
  double local_pct = 0.0;
  double db = 0.0;
  std::optional<double> apq3_pct;
  std::optional<double> apq5_pct;
  std::optional<double> apq11_pct;
  std::optional<double> dda_pct;
};

/// Per-mark cycle amplitude: peak |x| within a quarter period of the mark.
inline std::vector<std::vector<double>> cycle_amplitudes(const dsp::Waveform& w, const PeriodMarks& marks) {
  std::vector<std::vector<double>> out;
  const double sr = w.sample_rate;
  for (const auto& run : marks.runs) {
    if (run.size() < 2) continue;
    std::vector<double> amps;
    for (std::size_t i = 0; i < run.size(); ++i) {
      const double period = i + 1 < run.size() ? run[i + 1] - run[i] : run[i] - run[i - 1];
      const auto centre = static_cast<std::ptrdiff_t>(std::llround(run[i] * sr));
      const auto half = std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::llround(0.25 * period * sr)));
      const auto a = std::max<std::ptrdiff_t>(0, centre - half);
      const auto b = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w.size()) - 1, centre + half);
      double peak = 0.0;
      for (auto k = a; k <= b; ++k) peak = std::max(peak, std::abs(w.samples[static_cast<std::size_t>(k)]));
      require(peak > 0.0, ErrorCode::kDegenerateCycle, "cycle with zero amplitude");
      amps.push_back(peak);
    }
    out.push_back(std::move(amps));
  }
  return out;
}

inline ShimmerMetrics shimmer_from_amplitudes(const std::vector<std::vector<double>>& amps) {
  std::size_t cycles = 0;
  for (const auto& a : amps) {
    cycles += a.size();
    for (double v : a) require(v > 0.0, ErrorCode::kDegenerateCycle, "cycle with zero amplitude");
  }
  require(cycles >= 3, ErrorCode::kTooFewPeriods, "shimmer needs at least 3 cycles");
  const double mean_a = detail::pooled_mean(amps);
  const auto [diff, n] = detail::mean_abs_successive(amps);
  require(n > 0, ErrorCode::kTooFewPeriods, "no run contains two consecutive cycles");

  ShimmerMetrics s;
  s.local_pct = 100.0 * diff / mean_a;
  double db = 0.0;
  for (const auto& a : amps) {
    for (std::size_t i = 1; i < a.size(); ++i) db += std::abs(20.0 * std::log10(a[i] / a[i - 1]));
  }
  s.db = db / static_cast<double>(n);
  if (auto q = detail::perturbation_quotient(amps, 3)) {
    s.apq3_pct = 100.0 * *q / mean_a;
    s.dda_pct = 3.0 * *s.apq3_pct;
  }
  if (auto q = detail::perturbation_quotient(amps, 5)) s.apq5_pct = 100.0 * *q / mean_a;
  if (auto q = detail::perturbation_quotient(amps, 11)) s.apq11_pct = 100.0 * *q / mean_a;
  return s;
}

inline ShimmerMetrics shimmer_metrics(const dsp::Waveform& w, const PeriodMarks& marks) {
  require(marks.period_count() >= 3, ErrorCode::kTooFewPeriods, "shimmer needs at least 3 periods");
  return shimmer_from_amplitudes(cycle_amplitudes(w, marks));
}

}  // namespace voxbm::biomarkers
