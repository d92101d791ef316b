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
#include <numbers>
#include <vector>

#include "voxbm/dsp/waveform.hpp"

namespace voxbm::dsp {

/// Band-limited resampling with a Hann-windowed sinc kernel. The cutoff sits
/// at 95% of the lower Nyquist frequency.
inline Waveform resample(const Waveform& w, int target_rate, int zero_crossings = 16) {
  require(target_rate > 0, ErrorCode::kInvalidArgument, "target sample rate must be positive");
  if (w.sample_rate == target_rate || w.empty()) return Waveform{w.samples, target_rate};

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const double cutoff = 0.95 * std::min(1.0, ratio);  // relative to input Nyquist
  const double half_width = zero_crossings / cutoff;  // in input samples
  const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(w.size()) * ratio));
  std::vector<double> out(out_len, 0.0);
  const auto in_len = static_cast<std::ptrdiff_t>(w.size());

  for (std::size_t j = 0; j < out_len; ++j) {
    const double centre = static_cast<double>(j) / ratio;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(centre - half_width));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(centre + half_width));
    double acc = 0.0;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(lo, 0); i <= std::min(hi, in_len - 1); ++i) {
      const double d = static_cast<double>(i) - centre;
      const double arg = cutoff * d;
      const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * d / half_width);
      acc += w.samples[static_cast<std::size_t>(i)] * cutoff * sinc * win;
    }
    out[j] = acc;
  }
  return Waveform{std::move(out), target_rate};
}

}  // namespace voxbm::dsp
