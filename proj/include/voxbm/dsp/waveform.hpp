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

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "voxbm/core/error.hpp"

namespace voxbm::dsp {

/// Mono PCM audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::span<const double> view() const { return samples; }
};

inline void validate(const Waveform& w) {
  require(w.sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  for (double s : w.samples) {
    require(std::isfinite(s), ErrorCode::kInvalidArgument, "waveform contains a non-finite sample");
  }
}

inline Waveform scaled(const Waveform& w, double gain) {
  Waveform out = w;
  for (double& s : out.samples) s *= gain;
  return out;
}

inline Waveform concat(const Waveform& a, const Waveform& b) {
  require(a.sample_rate == b.sample_rate || a.empty() || b.empty(), ErrorCode::kInvalidArgument,
          "cannot concatenate waveforms with different sample rates");
  Waveform out = a.empty() ? Waveform{{}, b.sample_rate} : a;
  out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
  return out;
}

inline double signal_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

inline double peak_abs(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace voxbm::dsp
