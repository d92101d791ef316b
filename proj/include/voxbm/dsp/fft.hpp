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

// Real-input FFT helpers over Eigen's FFT module. Analysis frames in this
// library are powers of two, which the helpers enforce.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "voxbm/core/error.hpp"

namespace voxbm::dsp {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// One-sided spectrum of a real frame: size() / 2 + 1 bins.
struct ComplexSpectrum {
  std::vector<Complex> bins;
  std::size_t size = 0;  // length of the time-domain frame

  double bin_hz(int sample_rate) const {
    return static_cast<double>(sample_rate) / static_cast<double>(size);
  }
};

/// Transform objects are cached per thread, so concurrent callers never
/// share state.
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

inline ComplexSpectrum fft_real(std::span<const double> frame) {
  require(is_power_of_two(frame.size()), ErrorCode::kBadLength,
          "fft_real needs a power-of-two frame (got " + std::to_string(frame.size()) + ")");
  const std::size_t n = frame.size();
  std::vector<double> in(frame.begin(), frame.end());
  std::vector<Complex> buf;
  fft_engine().fwd(buf, in);
  buf.resize(n / 2 + 1);
  return ComplexSpectrum{std::move(buf), n};
}

/// Inverse of fft_real. Uses Hermitian symmetry to rebuild the full spectrum.
inline std::vector<double> inverse_fft_real(const ComplexSpectrum& spectrum) {
  const std::size_t n = spectrum.size;
  require(is_power_of_two(n) && spectrum.bins.size() == n / 2 + 1, ErrorCode::kBadLength,
          "spectrum does not describe a power-of-two real frame");
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k <= n / 2; ++k) buf[k] = spectrum.bins[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = std::conj(spectrum.bins[n - k]);
  std::vector<Complex> out;
  fft_engine().inv(out, buf);
  std::vector<double> real(n);
  for (std::size_t i = 0; i < n; ++i) real[i] = out[i].real();
  return real;
}

/// Zero-pads (or truncates) a frame to `n` samples.
inline std::vector<double> zero_padded(std::span<const double> frame, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const std::size_t m = std::min(n, frame.size());
  for (std::size_t i = 0; i < m; ++i) out[i] = frame[i];
  return out;
}

}  // namespace voxbm::dsp
