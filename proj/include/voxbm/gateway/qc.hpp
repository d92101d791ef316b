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

// Recording quality control applied before feature extraction.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/biomarkers/summary.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::gateway {

inline constexpr double kQcFrameS = 0.100;
inline constexpr double kQcEdgeFraction = 0.10;  // quietest / loudest share of frames
inline constexpr double kActiveFloorDbfs = -60.0;
inline constexpr double kActiveRangeDb = 40.0;
inline constexpr double kActiveShare = 0.9;
inline constexpr double kClipLevel = 0.999;
inline constexpr std::size_t kClipRun = 3;

struct QcRecord {
  double duration_s = 0.0;         // whole file
  double active_duration_s = 0.0;  // first to last active frame
  bool too_short = false;
  bool clipped = false;
  std::size_t clipped_runs = 0;
  std::optional<double> snr_estimate_db;  // absent when the file has no signal
  bool snr_unavailable = false;

  bool failed() const { return too_short || clipped; }
  std::vector<std::string> reasons() const {
    std::vector<std::string> r;
    if (too_short) r.emplace_back("too_short");
    if (clipped) r.emplace_back("clipped");
    return r;
  }
};

/// Mean-square energy of consecutive non-overlapping frames.
inline std::vector<double> frame_energies(const dsp::Waveform& w, double frame_s = kQcFrameS) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frame_s * w.sample_rate)));
  std::vector<double> e;
  for (std::size_t start = 0; start + n <= w.size(); start += n) {
    double acc = 0.0;
    for (std::size_t i = start; i < start + n; ++i) acc += w.samples[i] * w.samples[i];
    e.push_back(acc / static_cast<double>(n));
  }
  return e;
}

/// Loudest-decile over quietest-decile frame energy, with the noise share
/// removed from the loud frames: 10 log10((E_loud - E_quiet) / E_quiet).
inline std::optional<double> estimate_snr_db(const std::vector<double>& energies) {
  if (energies.empty()) return std::nullopt;
  std::vector<double> e = energies;
  std::sort(e.begin(), e.end());
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kQcEdgeFraction * e.size())));
  double quiet = 0.0;
  double loud = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    quiet += e[i];
    loud += e[e.size() - 1 - i];
  }
  quiet /= static_cast<double>(k);
  loud /= static_cast<double>(k);
  if (!(loud > 0.0)) return std::nullopt;
  constexpr double kTiny = 1e-20;
  return 10.0 * std::log10(std::max(loud - quiet, kTiny) / std::max(quiet, kTiny));
}

/// Span from the first to the last frame within 40 dB of the loudest frame
/// and above -60 dBFS (mean square of a full-scale sine is -3 dBFS).
inline double active_duration_s(const std::vector<double>& energies, double frame_s = kQcFrameS) {
  if (energies.empty()) return 0.0;
  const double peak = *std::max_element(energies.begin(), energies.end());
  const double floor = std::max(peak * std::pow(10.0, -kActiveRangeDb / 10.0), std::pow(10.0, kActiveFloorDbfs / 10.0));
  std::ptrdiff_t first = -1;
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (energies[i] >= floor && energies[i] > 0.0) {
      if (first < 0) first = static_cast<std::ptrdiff_t>(i);
      last = static_cast<std::ptrdiff_t>(i);
    }
  }
  return first < 0 ? 0.0 : static_cast<double>(last - first + 1) * frame_s;
}

/// too_short when the file is shorter than the task minimum or its active
/// span covers less than 90% of it (a silent file is always too short).
/// Clipped when some run of at least three consecutive samples reaches
/// |x| >= 0.999.
inline QcRecord qc_check(const dsp::Waveform& w, double min_duration_s) {
  QcRecord q;
  q.duration_s = w.duration_seconds();
  const auto energies = frame_energies(w);
  q.active_duration_s = std::min(q.duration_s, active_duration_s(energies));
  q.too_short = q.duration_s < min_duration_s || q.active_duration_s < kActiveShare * min_duration_s;
  q.clipped_runs = biomarkers::count_clipped_runs(w.samples, kClipLevel, kClipRun);
  q.clipped = q.clipped_runs > 0;
  q.snr_estimate_db = estimate_snr_db(energies);
  q.snr_unavailable = !q.snr_estimate_db.has_value();
  return q;
}

inline nlohmann::json qc_to_json(const QcRecord& q) {
  nlohmann::json j = {{"duration_s", q.duration_s},     {"active_duration_s", q.active_duration_s},
                      {"too_short", q.too_short},       {"clipped", q.clipped},
                      {"clipped_runs", q.clipped_runs}, {"snr_unavailable", q.snr_unavailable}};
  j["snr_estimate_db"] = q.snr_estimate_db ? nlohmann::json(*q.snr_estimate_db) : nlohmann::json(nullptr);
  return j;
}

inline QcRecord qc_from_json(const nlohmann::json& j) {
  QcRecord q;
  q.duration_s = j.at("duration_s").get<double>();
  q.active_duration_s = j.at("active_duration_s").get<double>();
  q.too_short = j.at("too_short").get<bool>();
  q.clipped = j.at("clipped").get<bool>();
  q.clipped_runs = j.at("clipped_runs").get<std::size_t>();
  q.snr_unavailable = j.at("snr_unavailable").get<bool>();
  if (!j.at("snr_estimate_db").is_null()) q.snr_estimate_db = j["snr_estimate_db"].get<double>();
  return q;
}

}  // namespace voxbm::gateway
