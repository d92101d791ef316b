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

// Per-task feature vectors. summarize_task runs the extractors that apply to
// a task and records every failure as an absent entry with a reason code, so
// one bad measure never discards the rest of the recording.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voxbm/biomarkers/periods.hpp"
#include "voxbm/biomarkers/pitch.hpp"
#include "voxbm/biomarkers/rhythm.hpp"
#include "voxbm/biomarkers/voice.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/core/task.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::biomarkers {

inline constexpr std::array<std::string_view, 28> kBvmFeatures = {
    "f0_mean_hz",        "f0_sd_hz",          "sff_hz",           "pitch_range_semitones",
    "jitter_local_pct",  "jitter_abs_s",      "jitter_rap_pct",   "jitter_ppq5_pct",
    "jitter_ddp_pct",    "shimmer_local_pct", "shimmer_db",       "shimmer_apq3_pct",
    "shimmer_apq5_pct",  "shimmer_apq11_pct", "shimmer_dda_pct",  "hnr_db",
    "nhr_ratio",         "nne_db",            "cpp_db",           "f1_hz",
    "f2_hz",             "f3_hz",             "intensity_mean_db", "intensity_range_db",
    "mpt_s",             "ddk_rate_per_s",    "ddk_cv",           "speech_rate_syll_per_s",
};

inline bool is_bvm_feature(std::string_view name) {
  return std::find(kBvmFeatures.begin(), kBvmFeatures.end(), name) != kBvmFeatures.end();
}

inline const std::vector<std::string>& phonation_features() {
  static const std::vector<std::string> v = {
      "f0_mean_hz",       "f0_sd_hz",         "jitter_local_pct", "jitter_abs_s",      "jitter_rap_pct",
      "jitter_ppq5_pct",  "jitter_ddp_pct",   "shimmer_local_pct", "shimmer_db",       "shimmer_apq3_pct",
      "shimmer_apq5_pct", "shimmer_apq11_pct", "shimmer_dda_pct", "hnr_db",            "nhr_ratio",
      "nne_db",           "cpp_db",           "f1_hz",            "f2_hz",             "f3_hz",
      "mpt_s"};
  return v;
}

inline const std::vector<std::string>& ddk_features() {
  static const std::vector<std::string> v = {"ddk_rate_per_s", "ddk_cv"};
  return v;
}

inline const std::vector<std::string>& prosody_features() {
  static const std::vector<std::string> v = {"sff_hz", "pitch_range_semitones", "intensity_mean_db",
                                             "intensity_range_db", "speech_rate_syll_per_s"};
  return v;
}

/// Features that apply to a task, in canonical order.
inline std::vector<std::string> task_features(TaskCode task) {
  const std::vector<std::string>* group = nullptr;
  switch (task) {
    case TaskCode::kTask1:
    case TaskCode::kTask3: group = &phonation_features(); break;
    case TaskCode::kTask2: group = &ddk_features(); break;
    default: group = &prosody_features(); break;
  }
  std::vector<std::string> out;
  for (auto name : kBvmFeatures) {
    if (std::find(group->begin(), group->end(), name) != group->end()) out.emplace_back(name);
  }
  return out;
}

struct QualityInfo {
  double duration_s = 0.0;
  bool clipped = false;
  std::size_t clipped_runs = 0;
};

/// Runs of at least `min_run` consecutive samples at or above `level` in
/// magnitude.
inline std::size_t count_clipped_runs(std::span<const double> x, double level = 0.999, std::size_t min_run = 3) {
  std::size_t runs = 0;
  std::size_t len = 0;
  for (double v : x) {
    if (std::abs(v) >= level) {
      if (++len == min_run) ++runs;
    } else {
      len = 0;
    }
  }
  return runs;
}

inline QualityInfo quality_info(const dsp::Waveform& w) {
  QualityInfo q;
  q.duration_s = w.duration_seconds();
  q.clipped_runs = count_clipped_runs(w.samples);
  q.clipped = q.clipped_runs > 0;
  return q;
}

class BVMVector {
 public:
  BVMVector() = default;
  explicit BVMVector(TaskCode task) : task_(task) {
    for (const auto& name : task_features(task)) applicable_.push_back(name);
  }

  TaskCode task() const { return task_; }
  const QualityInfo& quality() const { return quality_; }
  void set_quality(const QualityInfo& q) { quality_ = q; }

  bool applicable(std::string_view name) const {
    return std::find(applicable_.begin(), applicable_.end(), name) != applicable_.end();
  }
  bool has(std::string_view name) const { return values_.count(std::string(name)) > 0; }

  double at(std::string_view name) const {
    auto it = values_.find(std::string(name));
    require(it != values_.end(), ErrorCode::kSchemaError, "feature '" + std::string(name) + "' is absent");
    return it->second;
  }
  std::optional<double> get(std::string_view name) const {
    auto it = values_.find(std::string(name));
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  /// Stores a value. Non-finite values become absent entries.
  void set(std::string_view name, double value) {
    require(is_bvm_feature(name), ErrorCode::kSchemaError, "unknown feature '" + std::string(name) + "'");
    require(applicable(name), ErrorCode::kSchemaError,
            "feature '" + std::string(name) + "' does not apply to " + task_name(task_));
    if (!std::isfinite(value)) {
      mark_absent(name, "non_finite");
      return;
    }
    values_[std::string(name)] = value;
    reasons_.erase(std::string(name));
  }
  void set(std::string_view name, const std::optional<double>& value, std::string_view reason) {
    if (value) {
      set(name, *value);
    } else {
      mark_absent(name, reason);
    }
  }
  void mark_absent(std::string_view name, std::string_view reason) {
    values_.erase(std::string(name));
    reasons_[std::string(name)] = std::string(reason);
  }

  /// Reason codes for applicable entries that have no value.
  const std::map<std::string, std::string>& absent_reasons() const { return reasons_; }
  const std::vector<std::string>& applicable_features() const { return applicable_; }

  /// Present entries in canonical order.
  std::vector<std::pair<std::string, double>> entries() const {
    std::vector<std::pair<std::string, double>> out;
    for (auto name : kBvmFeatures) {
      auto it = values_.find(std::string(name));
      if (it != values_.end()) out.emplace_back(it->first, it->second);
    }
    return out;
  }

 private:
  TaskCode task_ = TaskCode::kTask1;
  std::vector<std::string> applicable_;
  std::map<std::string, double> values_;
  std::map<std::string, std::string> reasons_;
  QualityInfo quality_;
};

/// Flat object: task_code followed by present entries. Absent entries are
/// omitted.
inline nlohmann::ordered_json to_json(const BVMVector& v) {
  nlohmann::ordered_json j;
  j["task_code"] = task_name(v.task());
  for (const auto& [name, value] : v.entries()) j[name] = value;
  return j;
}

/// Reason codes and QC metadata, kept apart from the flat feature object.
inline nlohmann::ordered_json diagnostics_json(const BVMVector& v) {
  nlohmann::ordered_json j;
  j["task_code"] = task_name(v.task());
  j["duration_s"] = v.quality().duration_s;
  j["clipped"] = v.quality().clipped;
  j["clipped_runs"] = v.quality().clipped_runs;
  nlohmann::ordered_json absent = nlohmann::ordered_json::object();
  for (const auto& [name, reason] : v.absent_reasons()) absent[name] = reason;
  j["absent"] = absent;
  return j;
}

inline BVMVector bvm_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("task_code") && j["task_code"].is_string(), ErrorCode::kFormatError,
          "feature vector needs a task_code string");
  BVMVector v(parse_task(j["task_code"].get<std::string>()));
  for (const auto& [key, value] : j.items()) {
    if (key == "task_code") continue;
    require(value.is_number(), ErrorCode::kFormatError, "feature '" + key + "' is not a number");
    v.set(key, value.get<double>());
  }
  return v;
}

namespace detail {

template <typename Fn>
void guarded(BVMVector& v, const std::vector<std::string>& names, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    for (const auto& n : names) {
      if (!v.has(n)) v.mark_absent(n, error_code_name(e.code()));
    }
  }
}

}  // namespace detail

inline void extract_phonation(const dsp::Waveform& w, BVMVector& v, const PitchConfig& cfg) {
  std::optional<PitchTrack> pitch;
  detail::guarded(v, phonation_features(), [&] { pitch = track_pitch(w, cfg); });
  if (!pitch) return;

  v.set("mpt_s", mpt(*pitch));
  detail::guarded(v, {"f0_mean_hz", "f0_sd_hz"}, [&] {
    const auto f0 = pitch->voiced_f0();
    require(!f0.empty(), ErrorCode::kNoVoicedRegion, "no voiced frames");
    v.set("f0_mean_hz", stats::mean(f0));
    v.set("f0_sd_hz", stats::stddev(f0));
  });

  const std::vector<std::string> jitter_names = {"jitter_local_pct", "jitter_abs_s", "jitter_rap_pct",
                                                 "jitter_ppq5_pct", "jitter_ddp_pct"};
  const std::vector<std::string> shimmer_names = {"shimmer_local_pct", "shimmer_db",        "shimmer_apq3_pct",
                                                  "shimmer_apq5_pct",  "shimmer_apq11_pct", "shimmer_dda_pct"};
  std::vector<std::string> cycle_names = jitter_names;
  cycle_names.insert(cycle_names.end(), shimmer_names.begin(), shimmer_names.end());
  detail::guarded(v, cycle_names, [&] {
    const auto marks = mark_periods(w, *pitch);
    detail::guarded(v, jitter_names, [&] {
      const auto j = jitter_metrics(marks);
      v.set("jitter_local_pct", j.local_pct);
      v.set("jitter_abs_s", j.abs_s);
      v.set("jitter_rap_pct", j.rap_pct, "too_few_periods");
      v.set("jitter_ppq5_pct", j.ppq5_pct, "too_few_periods");
      v.set("jitter_ddp_pct", j.ddp_pct, "too_few_periods");
    });
    detail::guarded(v, shimmer_names, [&] {
      const auto s = shimmer_metrics(w, marks);
      v.set("shimmer_local_pct", s.local_pct);
      v.set("shimmer_db", s.db);
      v.set("shimmer_apq3_pct", s.apq3_pct, "too_few_periods");
      v.set("shimmer_apq5_pct", s.apq5_pct, "too_few_periods");
      v.set("shimmer_apq11_pct", s.apq11_pct, "too_few_periods");
      v.set("shimmer_dda_pct", s.dda_pct, "too_few_periods");
    });
  });

  detail::guarded(v, {"hnr_db", "nhr_ratio", "nne_db"}, [&] {
    const double h = hnr(w, *pitch);
    const auto nr = noise_ratios(h);
    v.set("hnr_db", h);
    v.set("nhr_ratio", nr.nhr_ratio);
    v.set("nne_db", nr.nne_db);
  });
  detail::guarded(v, {"cpp_db"}, [&] { v.set("cpp_db", cpp(w)); });
  detail::guarded(v, {"f1_hz", "f2_hz", "f3_hz"}, [&] {
    const auto f = formants(w, *pitch);
    v.set("f1_hz", f.f1_hz);
    v.set("f2_hz", f.f2_hz);
    v.set("f3_hz", f.f3_hz);
  });
}

inline void extract_ddk(const dsp::Waveform& w, BVMVector& v) {
  detail::guarded(v, ddk_features(), [&] {
    const auto d = ddk_metrics(w);
    v.set("ddk_rate_per_s", d.ddk_rate_per_s);
    v.set("ddk_cv", d.ddk_cv);
  });
}

inline void extract_prosody(const dsp::Waveform& w, BVMVector& v, const PitchConfig& cfg) {
  const std::vector<std::string> names = {"sff_hz", "pitch_range_semitones", "intensity_mean_db",
                                          "intensity_range_db"};
  detail::guarded(v, names, [&] {
    const auto p = prosody_stats(track_pitch(w, cfg), w);
    v.set("sff_hz", p.sff_hz);
    v.set("pitch_range_semitones", p.pitch_range_semitones);
    v.set("intensity_mean_db", p.intensity_mean_db);
    v.set("intensity_range_db", p.intensity_range_db);
  });
  const auto rate = speech_rate(w);
  if (rate.too_few_syllables) {
    v.mark_absent("speech_rate_syll_per_s", error_code_name(ErrorCode::kTooFewSyllables));
  } else {
    v.set("speech_rate_syll_per_s", rate.syllables_per_s);
  }
}

inline BVMVector summarize_task(const dsp::Waveform& w, TaskCode task, const PitchConfig& cfg = {}) {
  dsp::validate(w);
  BVMVector v(task);
  v.set_quality(quality_info(w));
  switch (task) {
    case TaskCode::kTask1:
    case TaskCode::kTask3: extract_phonation(w, v, cfg); break;
    case TaskCode::kTask2: extract_ddk(w, v); break;
    default: extract_prosody(w, v, cfg); break;
  }
  return v;
}

}  // namespace voxbm::biomarkers
