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

// Synthetic protocol recordings. Class 1 voices carry large cycle-to-cycle
// period and amplitude perturbation, irregular syllable timing and a
// flattened pitch contour; class 0 voices are steady. The corpus is
// separable by construction and exists so that protocol pipelines run
// without external data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "voxbm/core/task.hpp"
#include "voxbm/dsp/synth.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::experiments::fixtures {

inline constexpr int kFixtureRate = 16000;

struct VoiceProfile {
  double f0_hz = 120.0;
  double jitter = 0.005;   // uniform relative period perturbation
  double shimmer = 0.02;   // uniform relative amplitude perturbation
  double ddk_rate = 6.0;   // syllables per second
  double ddk_spread = 0.03;  // relative onset-interval perturbation
  double pitch_swing = 0.25;  // relative f0 excursion of the speech contour
};

/// Profile for a class with per-subject variation drawn from `seed`.
inline VoiceProfile class_profile(int label, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VoiceProfile p;
  p.f0_hz = 120.0 * (1.0 + 0.15 * u(rng));
  p.ddk_rate = 6.0 * (1.0 + 0.1 * u(rng));
  if (label == 1) {
    p.jitter = 0.20;
    p.shimmer = 0.25;
    p.ddk_spread = 0.30;
    p.pitch_swing = 0.04;
  } else {
    p.jitter = 0.005;
    p.shimmer = 0.02;
    p.ddk_spread = 0.03;
    p.pitch_swing = 0.25;
  }
  return p;
}

inline void add_floor(std::vector<double>& x, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  for (double& v : x) v += d(rng);
}

inline dsp::Waveform sustained_vowel(const VoiceProfile& p, double seconds, std::vector<double> formants,
                                     std::uint64_t seed) {
  dsp::synth::VoiceParams vp;
  vp.f0_hz = p.f0_hz;
  vp.seconds = seconds;
  vp.sample_rate = kFixtureRate;
  vp.period_perturbation = p.jitter;
  vp.amplitude_perturbation = p.shimmer;
  vp.formants_hz = std::move(formants);
  vp.seed = seed;
  auto w = dsp::synth::vowel(vp);
  add_floor(w.samples, 1e-4, seed ^ 0x5eedULL);
  return w;
}

/// /pa/-/ta/-/ka/ style bursts with perturbed onset intervals.
inline dsp::Waveform syllable_train(const VoiceProfile& p, double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> onsets;
  const double interval = 1.0 / p.ddk_rate;
  for (double t = 0.2; t + 0.1 < seconds; t += interval * (1.0 + p.ddk_spread * u(rng))) onsets.push_back(t);
  auto w = dsp::synth::bursts(onsets, 0.4 * interval, seconds, kFixtureRate, 2.0 * p.f0_hz, 0.5);
  add_floor(w.samples, 1e-4, seed ^ 0x5eedULL);
  return w;
}

/// Running speech stand-in: short voiced syllables whose pitch follows a slow
/// contour, separated by pauses.
inline dsp::Waveform utterance(const VoiceProfile& p, double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(dsp::synth::sample_count(seconds, kFixtureRate), 0.0);
  const double syllable_s = 0.18;
  double t = 0.15;
  std::uint64_t k = 0;
  while (t + syllable_s < seconds) {
    const double f0 = p.f0_hz * (1.0 + p.pitch_swing * std::sin(dsp::synth::kTwoPi * 0.35 * t));
    dsp::synth::VoiceParams vp;
    vp.f0_hz = f0;
    vp.seconds = syllable_s;
    vp.sample_rate = kFixtureRate;
    vp.period_perturbation = p.jitter;
    vp.amplitude_perturbation = p.shimmer;
    vp.seed = seed + 101 * ++k;
    vp.peak = 0.3 + 0.2 * u(rng);
    const auto syl = dsp::synth::vowel(vp);
    const auto start = dsp::synth::sample_count(t, kFixtureRate);
    const std::size_t n = syl.size();
    for (std::size_t i = 0; i < n && start + i < x.size(); ++i) {
      const double env = 0.5 - 0.5 * std::cos(dsp::synth::kTwoPi * static_cast<double>(i) / static_cast<double>(n));
      x[start + i] += env * syl.samples[i];
    }
    t += syllable_s + 0.08 + 0.12 * u(rng);
  }
  add_floor(x, 1e-4, seed ^ 0x5eedULL);
  return dsp::Waveform{std::move(x), kFixtureRate};
}

inline const std::vector<double>& vowel_i() {
  static const std::vector<double> f = {300.0, 2300.0, 3000.0};
  return f;
}
inline const std::vector<double>& vowel_a() {
  static const std::vector<double> f = {700.0, 1220.0, 2600.0};
  return f;
}

/// One recording for `task`. Reading and monologue tasks share the running
/// speech generator.
inline dsp::Waveform recording(TaskCode task, const VoiceProfile& p, double seconds, std::uint64_t seed) {
  switch (task) {
    case TaskCode::kTask1: return sustained_vowel(p, seconds, vowel_i(), seed);
    case TaskCode::kTask3: return sustained_vowel(p, seconds, vowel_a(), seed);
    case TaskCode::kTask2: return syllable_train(p, seconds, seed);
    default: return utterance(p, seconds, seed);
  }
}

struct LabeledRecording {
  dsp::Waveform waveform;
  TaskCode task = TaskCode::kTask1;
  int label = 0;
  std::string subject_id;
};

struct CorpusSpec {
  int subjects_per_class = 8;
  std::vector<TaskCode> tasks = {TaskCode::kTask1, TaskCode::kTask2, TaskCode::kTask3, TaskCode::kTask5};
  double seconds = 2.0;
  std::uint64_t seed = 1;
};

inline std::string subject_name(int label, int index) {
  return std::string(label == 1 ? "pd" : "hc") + "_" + std::to_string(index);
}

inline std::uint64_t subject_seed(const CorpusSpec& spec, int label, int index) {
  return spec.seed * 1000003ULL + static_cast<std::uint64_t>(label) * 7919ULL + static_cast<std::uint64_t>(index) * 104729ULL;
}

/// One recording per (subject, task).
inline std::vector<LabeledRecording> corpus(const CorpusSpec& spec) {
  std::vector<LabeledRecording> out;
  for (int label : {0, 1}) {
    for (int i = 0; i < spec.subjects_per_class; ++i) {
      const auto seed = subject_seed(spec, label, i);
      const auto profile = class_profile(label, seed);
      for (TaskCode task : spec.tasks) {
        out.push_back({recording(task, profile, spec.seconds, seed + static_cast<std::uint64_t>(task)), task, label,
                       subject_name(label, i)});
      }
    }
  }
  return out;
}

}  // namespace voxbm::experiments::fixtures
