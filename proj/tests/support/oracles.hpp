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

// Independent reference computations used only by tests. Nothing here calls
// into the library's own implementation paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace voxbm::testing {

/// O(N^2) DFT, one-sided. Angles are reduced modulo N for accuracy.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = (k * i) % n;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
      acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

/// Direct-sum autocorrelation sum_i x[i] x[i + lag], divided by lag-0.
inline std::vector<double> brute_autocorr(const std::vector<double>& x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    for (std::size_t i = 0; i + lag < x.size(); ++i) r[lag] += x[i] * x[i + lag];
  }
  const double r0 = r[0];
  for (double& v : r) v /= r0;
  return r;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

/// Central finite difference of a scalar function of one parameter.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Dense-grid minimum of the Branin function on [-5, 10] x [0, 15].
inline double branin(double x1, double x2) {
  const double a = 1.0;
  const double b = 5.1 / (4.0 * std::numbers::pi * std::numbers::pi);
  const double c = 5.0 / std::numbers::pi;
  const double r = 6.0;
  const double s = 10.0;
  const double t = 1.0 / (8.0 * std::numbers::pi);
  const double q = x2 - b * x1 * x1 + c * x1 - r;
  return a * q * q + s * (1.0 - t) * std::cos(x1) + s;
}

inline double branin_grid_minimum(int steps) {
  double best = 1e300;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const double x1 = -5.0 + 15.0 * i / steps;
      const double x2 = 15.0 * j / steps;
      best = std::min(best, branin(x1, x2));
    }
  }
  return best;
}

/// Mean absolute deviation of each interior value from the centred k-point
/// average, over a single sequence. Written out term by term.
inline double oracle_perturbation(const std::vector<double>& v, int k) {
  const int h = k / 2;
  double acc = 0.0;
  int n = 0;
  for (int i = h; i + h < static_cast<int>(v.size()); ++i) {
    double s = 0.0;
    for (int j = -h; j <= h; ++j) s += v[static_cast<std::size_t>(i + j)];
    acc += std::abs(v[static_cast<std::size_t>(i)] - s / k);
    ++n;
  }
  return acc / n;
}

inline double oracle_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Relative mean absolute successive difference, in percent.
inline double oracle_local_pct(const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += std::abs(v[i] - v[i - 1]);
  return 100.0 * acc / static_cast<double>(v.size() - 1) / oracle_mean(v);
}

inline double oracle_shimmer_db(const std::vector<double>& a) {
  double acc = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) acc += std::abs(20.0 * std::log10(a[i] / a[i - 1]));
  return acc / static_cast<double>(a.size() - 1);
}

}  // namespace voxbm::testing
