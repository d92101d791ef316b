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

// Short-time Fourier analysis/resynthesis with a periodic Hann window at 50%
// overlap. The signal is padded by half a frame on both sides so every output
// sample is covered by two frames and overlap-add reconstructs it exactly.

#include <vector>

#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/waveform.hpp"
#include "voxbm/dsp/window.hpp"

namespace voxbm::dsp {

struct StftConfig {
  double frame_s = 0.032;
};

class Stft {
 public:
  Stft(int sample_rate, std::size_t frame_length)
      : sample_rate_(sample_rate),
        frame_(frame_length % 2 == 0 ? frame_length : frame_length + 1),
        hop_(frame_ / 2),
        fft_size_(next_power_of_two(frame_)),
        window_(periodic_hann(frame_)) {}

  static Stft for_duration(int sample_rate, double frame_s) {
    return Stft(sample_rate, std::max<std::size_t>(4, seconds_to_samples(frame_s, sample_rate)));
  }

  std::size_t frame_length() const { return frame_; }
  std::size_t hop() const { return hop_; }
  std::size_t fft_size() const { return fft_size_; }
  std::size_t bin_count() const { return fft_size_ / 2 + 1; }
  double bin_hz() const { return static_cast<double>(sample_rate_) / static_cast<double>(fft_size_); }
  int sample_rate() const { return sample_rate_; }

  std::vector<ComplexSpectrum> analyze(std::span<const double> x) const {
    const std::size_t padded_len = x.size() + frame_;
    std::vector<double> padded(padded_len + frame_, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) padded[i + hop_] = x[i];
    const std::size_t frames = x.empty() ? 0 : (x.size() + hop_ - 1) / hop_ + 1;
    std::vector<ComplexSpectrum> out;
    out.reserve(frames);
    std::vector<double> buf(fft_size_);
    for (std::size_t t = 0; t < frames; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      for (std::size_t i = 0; i < frame_; ++i) buf[i] = padded[t * hop_ + i] * window_[i];
      out.push_back(fft_real(buf));
    }
    return out;
  }

  /// Overlap-add; `length` is the original signal length.
  std::vector<double> synthesize(const std::vector<ComplexSpectrum>& spectra, std::size_t length) const {
    std::vector<double> padded(length + 2 * frame_ + hop_, 0.0);
    for (std::size_t t = 0; t < spectra.size(); ++t) {
      const auto frame = inverse_fft_real(spectra[t]);
      for (std::size_t i = 0; i < frame_; ++i) padded[t * hop_ + i] += frame[i];
    }
    return std::vector<double>(padded.begin() + static_cast<std::ptrdiff_t>(hop_),
                               padded.begin() + static_cast<std::ptrdiff_t>(hop_ + length));
  }

 private:
  int sample_rate_;
  std::size_t frame_;
  std::size_t hop_;
  std::size_t fft_size_;
  std::vector<double> window_;
};

}  // namespace voxbm::dsp
