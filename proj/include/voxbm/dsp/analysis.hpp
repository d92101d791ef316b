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

// Frame-level analysis primitives: normalized autocorrelation, Burg LPC,
// real cepstrum and RMS level.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/window.hpp"

namespace voxbm::dsp {

namespace detail {

// Unnormalized autocorrelation r[0..n-1] of `x` via the FFT (zero-padded so
// the circular correlation equals the linear one).
inline std::vector<double> raw_autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t m = next_power_of_two(2 * n);
  auto spec = fft_real(zero_padded(x, m));
  for (auto& b : spec.bins) b = Complex(std::norm(b), 0.0);
  auto r = inverse_fft_real(spec);
  r.resize(n);
  return r;
}

inline const std::vector<double>& window_autocorrelation(WindowKind kind, std::size_t n) {
  thread_local std::map<std::pair<int, std::size_t>, std::vector<double>> cache;
  const auto key = std::make_pair(static_cast<int>(kind), n);
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto r = raw_autocorrelation(make_window(kind, n));
    const double r0 = r[0];
    for (double& v : r) v /= r0;
    it = cache.emplace(key, std::move(r)).first;
  }
  return it->second;
}

}  // namespace detail

/// Autocorrelation of the mean-removed, windowed frame divided by the
/// window's own autocorrelation. Lags 0 .. N/2 are returned; beyond that the
/// window autocorrelation is too small for the ratio to be meaningful.
inline std::vector<double> autocorr_normalized(std::span<const double> frame, WindowKind kind) {
  require(!frame.empty(), ErrorCode::kEmptyInput, "autocorrelation of an empty frame");
  const std::size_t n = frame.size();
  double mean = 0.0;
  for (double v : frame) mean += v;
  mean /= static_cast<double>(n);

  const auto win = make_window(kind, n);
  std::vector<double> x(n);
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (frame[i] - mean) * win[i];
    energy += x[i] * x[i];
  }
  require(energy > 0.0, ErrorCode::kSilentFrame, "frame has no energy");

  const auto r = detail::raw_autocorrelation(x);
  const auto& rw = detail::window_autocorrelation(kind, n);
  const std::size_t max_lag = n / 2;
  std::vector<double> out(max_lag + 1);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    out[lag] = rw[lag] > 0.0 ? (r[lag] / r[0]) / rw[lag] : 0.0;
  }
  out[0] = 1.0;
  return out;
}

struct LpcResult {
  /// Prediction coefficients: x[n] ~ sum_k coefficients[k-1] * x[n-k].
  std::vector<double> coefficients;
  /// Residual prediction-error power.
  double gain = 0.0;
};

/// Burg's method (forward + backward prediction error minimization).
inline LpcResult lpc_burg(std::span<const double> frame, int order) {
  const auto n = static_cast<std::ptrdiff_t>(frame.size());
  require(order >= 2, ErrorCode::kBadLength, "LPC order must be at least 2");
  require(order < n, ErrorCode::kBadLength, "LPC order must be below the frame length");

  double power = 0.0;
  for (double v : frame) power += v * v;
  power /= static_cast<double>(n);
  require(power > 0.0, ErrorCode::kIllConditioned, "LPC of a silent frame");
  const double initial_power = power;

  std::vector<double> fwd(frame.begin(), frame.end() - 1);
  std::vector<double> bwd(frame.begin() + 1, frame.end());
  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0);
  std::vector<double> prev(static_cast<std::size_t>(order) + 1, 0.0);

  for (int k = 1; k <= order; ++k) {
    const std::ptrdiff_t len = n - k;
    double num = 0.0;
    double den = 0.0;
    for (std::ptrdiff_t j = 0; j < len; ++j) {
      num += fwd[j] * bwd[j];
      den += fwd[j] * fwd[j] + bwd[j] * bwd[j];
    }
    require(den > 0.0, ErrorCode::kIllConditioned, "LPC recursion hit a zero-energy residual");
    const double reflection = 2.0 * num / den;
    require(std::abs(reflection) < 1.0 - 1e-12, ErrorCode::kIllConditioned,
            "LPC reflection coefficient reached the unit circle (degenerate frame)");
    a[k] = reflection;
    for (int i = 1; i < k; ++i) a[i] = prev[i] - reflection * prev[k - i];
    power *= 1.0 - reflection * reflection;
    require(power > 1e-14 * initial_power, ErrorCode::kIllConditioned, "LPC residual vanished");
    if (k == order) break;
    prev = a;
    for (std::ptrdiff_t j = 0; j < len - 1; ++j) {
      fwd[j] -= prev[k] * bwd[j];
      bwd[j] = bwd[j + 1] - prev[k] * fwd[j + 1];
    }
  }
  LpcResult result;
  result.coefficients.assign(a.begin() + 1, a.end());
  result.gain = power;
  return result;
}

inline constexpr double kLogFloorDb = -200.0;
inline constexpr double kIntensityFloorDb = -120.0;

/// Inverse transform of the dB log-magnitude spectrum, so cepstral values
/// carry dB units. Returns N values indexed by quefrency in samples.
inline std::vector<double> real_cepstrum(std::span<const double> frame) {
  require(is_power_of_two(frame.size()), ErrorCode::kBadLength, "cepstrum needs a power-of-two frame");
  bool any = false;
  for (double v : frame) any = any || v != 0.0;
  require(any, ErrorCode::kSilentFrame, "cepstrum of an all-zero frame");
  auto spec = fft_real(frame);
  for (auto& b : spec.bins) {
    const double mag = std::abs(b);
    const double db = mag > 0.0 ? std::max(20.0 * std::log10(mag), kLogFloorDb) : kLogFloorDb;
    b = Complex(db, 0.0);
  }
  return inverse_fft_real(spec);
}

/// 20 log10(rms / reference), clamped at -120 dB.
inline double rms_db(std::span<const double> frame, double reference = 1.0) {
  require(reference > 0.0, ErrorCode::kInvalidArgument, "reference amplitude must be positive");
  const double p = signal_power(frame);
  if (p <= 0.0) return kIntensityFloorDb;
  return std::max(10.0 * std::log10(p) - 20.0 * std::log10(reference), kIntensityFloorDb);
}

/// Parabolic peak refinement around index i. Returns (offset, value).
inline std::pair<double, double> parabolic_peak(std::span<const double> y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return {0.0, y[i]};
  const double a = y[i - 1];
  const double b = y[i];
  const double c = y[i + 1];
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return {0.0, b};
  const double offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  return {offset, b - 0.25 * (a - c) * offset};
}

}  // namespace voxbm::dsp
