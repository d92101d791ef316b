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

// Third-octave microphone calibration. Both recordings are analysed with a
// long STFT so that the lowest bands span several bins.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/dsp/fft.hpp"
#include "voxbm/dsp/stft.hpp"
#include "voxbm/dsp/synth.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::conditioning {

inline constexpr double kMaxCalibrationGainDb = 24.0;

/// Nominal 1/3-octave centres from 63 Hz to 8 kHz (base-2, 1 kHz reference).
inline std::vector<double> third_octave_centers() {
  std::vector<double> c;
  for (int k = -12; k <= 9; ++k) c.push_back(1000.0 * std::pow(2.0, k / 3.0));
  return c;
}

struct CalibrationCurve {
  std::vector<double> band_centers_hz = third_octave_centers();
  std::vector<double> gains_db = std::vector<double>(band_centers_hz.size(), 0.0);
};

inline double band_lower_hz(double center) { return center * std::pow(2.0, -1.0 / 6.0); }
inline double band_upper_hz(double center) { return center * std::pow(2.0, 1.0 / 6.0); }

namespace detail {

inline dsp::Stft calibration_stft(int sample_rate) {
  return dsp::Stft(sample_rate, dsp::next_power_of_two(static_cast<std::size_t>(std::max(4, sample_rate / 4))));
}

/// Band index for each STFT bin; bins outside every band map to the nearest
/// band on a log-frequency axis.
inline std::vector<std::size_t> bin_bands(const dsp::Stft& stft, const std::vector<double>& centers) {
  std::vector<std::size_t> out(stft.bin_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double f = std::max(static_cast<double>(k) * stft.bin_hz(), 1.0);
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t b = 0; b < centers.size(); ++b) {
      const double d = std::abs(std::log2(f / centers[b]));
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    out[k] = best;
  }
  return out;
}

}  // namespace detail

/// Summed spectral energy per band, in dB (-inf for an empty band).
inline std::vector<double> band_energies_db(const dsp::Waveform& w, const std::vector<double>& centers) {
  dsp::validate(w);
  const auto stft = detail::calibration_stft(w.sample_rate);
  std::vector<double> energy(centers.size(), 0.0);
  for (const auto& s : stft.analyze(w.samples)) {
    for (std::size_t k = 0; k < s.bins.size(); ++k) {
      const double f = static_cast<double>(k) * stft.bin_hz();
      for (std::size_t b = 0; b < centers.size(); ++b) {
        if (f >= band_lower_hz(centers[b]) && f < band_upper_hz(centers[b])) energy[b] += std::norm(s.bins[k]);
      }
    }
  }
  std::vector<double> db(energy.size());
  for (std::size_t b = 0; b < db.size(); ++b) db[b] = 10.0 * std::log10(energy[b]);
  return db;
}

inline CalibrationCurve estimate_calibration(const dsp::Waveform& reference, const dsp::Waveform& device) {
  dsp::validate(reference);
  dsp::validate(device);
  require(reference.sample_rate == device.sample_rate, ErrorCode::kInvalidArgument,
          "calibration recordings must share a sample rate");
  require(dsp::signal_power(reference.samples) > 0.0 && dsp::signal_power(device.samples) > 0.0,
          ErrorCode::kSilentInput, "calibration recording is silent");
  const double a = reference.duration_seconds();
  const double b = device.duration_seconds();
  require(std::abs(a - b) <= 0.1 * std::max(a, b), ErrorCode::kInvalidArgument,
          "calibration recordings differ in duration by more than 10%");

  CalibrationCurve curve;
  const auto ref = band_energies_db(reference, curve.band_centers_hz);
  const auto dev = band_energies_db(device, curve.band_centers_hz);
  for (std::size_t i = 0; i < curve.gains_db.size(); ++i) {
    double g = 0.0;
    if (std::isfinite(ref[i]) && std::isfinite(dev[i])) {
      g = ref[i] - dev[i];
    } else if (std::isfinite(ref[i])) {
      g = kMaxCalibrationGainDb;
    } else if (std::isfinite(dev[i])) {
      g = -kMaxCalibrationGainDb;
    }
    curve.gains_db[i] = std::clamp(g, -kMaxCalibrationGainDb, kMaxCalibrationGainDb);
  }
  return curve;
}

/// Piecewise-constant per-band STFT weighting; gains are clamped to +/-24 dB.
inline dsp::Waveform apply_calibration(const dsp::Waveform& w, const CalibrationCurve& curve) {
  dsp::validate(w);
  require(curve.band_centers_hz.size() == curve.gains_db.size() && !curve.gains_db.empty(),
          ErrorCode::kInvalidArgument, "calibration curve is malformed");
  if (w.empty()) return w;
  const auto stft = detail::calibration_stft(w.sample_rate);
  const auto bands = detail::bin_bands(stft, curve.band_centers_hz);
  std::vector<double> gain(bands.size());
  for (std::size_t k = 0; k < gain.size(); ++k) {
    const double db = std::clamp(curve.gains_db[bands[k]], -kMaxCalibrationGainDb, kMaxCalibrationGainDb);
    gain[k] = std::pow(10.0, db / 20.0);
  }
  auto spectra = stft.analyze(w.samples);
  for (auto& s : spectra) {
    for (std::size_t k = 0; k < s.bins.size(); ++k) s.bins[k] *= gain[k];
  }
  return dsp::Waveform{stft.synthesize(spectra, w.size()), w.sample_rate};
}

inline nlohmann::json calibration_to_json(const CalibrationCurve& c) {
  return {{"band_centers_hz", c.band_centers_hz}, {"gains_db", c.gains_db}};
}

inline CalibrationCurve calibration_from_json(const nlohmann::json& j) {
  try {
    CalibrationCurve c;
    c.band_centers_hz = j.at("band_centers_hz").get<std::vector<double>>();
    c.gains_db = j.at("gains_db").get<std::vector<double>>();
    require(c.band_centers_hz.size() == c.gains_db.size() && !c.gains_db.empty(), ErrorCode::kFormatError,
            "calibration bands and gains differ in length");
    for (double& g : c.gains_db) g = std::clamp(g, -kMaxCalibrationGainDb, kMaxCalibrationGainDb);
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed calibration curve: ") + e.what());
  }
}

/// Program material for calibration; the bundled fixture WAV is this signal.
inline dsp::Waveform calibration_sweep(int sample_rate = 16000) {
  return dsp::synth::log_sweep(40.0, 0.49375 * sample_rate, 6.0, sample_rate, 0.5);
}

}  // namespace voxbm::conditioning
