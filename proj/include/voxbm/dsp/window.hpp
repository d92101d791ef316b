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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::dsp {

enum class WindowKind { kRectangular, kHann, kGaussian };

inline std::string_view window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::kRectangular: return "rectangular";
    case WindowKind::kHann: return "hann";
    case WindowKind::kGaussian: return "gaussian";
  }
  return "rectangular";
}

/// Symmetric window of length n. Gaussian uses sigma = n / 6.
inline std::vector<double> make_window(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double last = static_cast<double>(n - 1);
  switch (kind) {
    case WindowKind::kRectangular:
      break;
    case WindowKind::kHann:
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / last);
      }
      break;
    case WindowKind::kGaussian: {
      const double sigma = static_cast<double>(n) / 6.0;
      const double centre = last / 2.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (static_cast<double>(i) - centre) / sigma;
        w[i] = std::exp(-0.5 * d * d);
      }
      break;
    }
  }
  return w;
}

/// Periodic Hann (denominator n). Sums to a constant at 50% overlap, which the
/// STFT resynthesis relies on.
inline std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

struct FrameSequence {
  std::vector<std::vector<double>> frames;  // T x N
  std::size_t frame_length = 0;             // N
  std::size_t hop = 0;
  WindowKind window_kind = WindowKind::kRectangular;
  int sample_rate = 0;

  std::size_t count() const { return frames.size(); }
  /// Time of the centre of frame t, in seconds.
  double centre_time(std::size_t t) const {
    return (static_cast<double>(t * hop) + 0.5 * static_cast<double>(frame_length)) / sample_rate;
  }
};

inline std::size_t seconds_to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

inline std::size_t frame_count(std::size_t signal_len, std::size_t frame_len, std::size_t hop) {
  if (signal_len < frame_len) return 0;
  return (signal_len - frame_len) / hop + 1;
}

inline FrameSequence window_frames(const Waveform& w, double frame_len_s, double hop_s, WindowKind kind) {
  require(!w.empty(), ErrorCode::kEmptyInput, "waveform is empty");
  require(w.sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  const std::size_t n = seconds_to_samples(frame_len_s, w.sample_rate);
  const std::size_t hop = seconds_to_samples(hop_s, w.sample_rate);
  require(n >= 2, ErrorCode::kInvalidArgument, "frame must span at least two samples");
  require(hop >= 1 && hop <= n, ErrorCode::kInvalidArgument, "hop must be in [1, frame length]");
  require(n <= w.size(), ErrorCode::kTooShort, "frame is longer than the signal");

  FrameSequence seq;
  seq.frame_length = n;
  seq.hop = hop;
  seq.window_kind = kind;
  seq.sample_rate = w.sample_rate;
  const auto win = make_window(kind, n);
  const std::size_t count = frame_count(w.size(), n, hop);
  seq.frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<double> frame(n);
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) frame[i] = w.samples[start + i] * win[i];
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace voxbm::dsp
