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

// Noise reduction: magnitude spectral subtraction against a speech-free lead
// segment, and a denoising autoencoder over log-magnitude STFT frames.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/conditioning/noise.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/dsp/resample.hpp"
#include "voxbm/dsp/stft.hpp"
#include "voxbm/dsp/waveform.hpp"
#include "voxbm/neural/mlp.hpp"
#include "voxbm/neural/serialize.hpp"
#include "voxbm/neural/train.hpp"

namespace voxbm::conditioning {

/// Analysis settings shared by every conditioning stage.
inline constexpr double kConditioningFrameS = 0.032;

struct SpectralSubtractConfig {
  double frame_s = kConditioningFrameS;
  double over_subtraction = 1.5;
  double floor = 0.02;
};

inline dsp::Waveform spectral_subtract(const dsp::Waveform& noisy, double noise_head_s,
                                       const SpectralSubtractConfig& cfg = {}) {
  dsp::validate(noisy);
  require(noise_head_s >= 0.1, ErrorCode::kInvalidArgument, "noise head must be at least 0.1 s");
  require(noisy.duration_seconds() > noise_head_s, ErrorCode::kTooShort, "noise head is longer than the signal");
  const auto stft = dsp::Stft::for_duration(noisy.sample_rate, cfg.frame_s);
  auto spectra = stft.analyze(noisy.samples);

  // Frames lying wholly inside the head (frame t covers [(t-1)hop, (t+1)hop)).
  const auto head = dsp::seconds_to_samples(noise_head_s, noisy.sample_rate);
  std::vector<double> noise(stft.bin_count(), 0.0);
  std::size_t used = 0;
  for (std::size_t t = 1; t < spectra.size() && (t + 1) * stft.hop() <= head; ++t) {
    for (std::size_t k = 0; k < noise.size(); ++k) noise[k] += std::abs(spectra[t].bins[k]);
    ++used;
  }
  require(used > 0, ErrorCode::kTooShort, "noise head shorter than one analysis frame");
  for (double& v : noise) v /= static_cast<double>(used);

  for (auto& s : spectra) {
    for (std::size_t k = 0; k < s.bins.size(); ++k) {
      const double mag = std::abs(s.bins[k]);
      if (mag <= 0.0) continue;
      const double cleaned = std::max(mag - cfg.over_subtraction * noise[k], cfg.floor * noise[k]);
      s.bins[k] *= cleaned / mag;
    }
  }
  return dsp::Waveform{stft.synthesize(spectra, noisy.size()), noisy.sample_rate};
}

// ---------------------------------------------------------------------------
// Denoising autoencoder

/// Log-magnitude floor, relative to the largest clean training magnitude.
inline constexpr double kRelativeLogFloor = 1e-3;

struct DaeConfig {
  double frame_s = kConditioningFrameS;
  std::vector<int> hidden_widths;  // empty: one hidden layer of F/2
  int epochs = 30;
  double learning_rate = 1e-3;
  int batch_size = 64;
  /// Independent noise draws per (recording, profile) pair.
  int mixes_per_profile = 4;
  std::uint64_t seed = 0;
};

/// Per-bin z-normalization.
struct BinNormalizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static BinNormalizer fit(const std::vector<std::vector<double>>& rows, std::size_t bins) {
    BinNormalizer n{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0)};
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < bins; ++k) n.mean[k] += row[k];
    }
    for (double& m : n.mean) m /= static_cast<double>(rows.size());
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < bins; ++k) n.scale[k] += (row[k] - n.mean[k]) * (row[k] - n.mean[k]);
    }
    for (double& v : n.scale) v = std::max(std::sqrt(v / static_cast<double>(rows.size())), 1e-6);
    return n;
  }
};

struct DAEModel {
  neural::MLPModel network;
  int sample_rate = 0;
  std::size_t frame_length = 0;
  double log_offset = 0.0;  // added to magnitudes before the log
  BinNormalizer input_norm;   // statistics of noisy training frames
  BinNormalizer target_norm;  // statistics of clean training frames
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_history;

  std::size_t bins() const { return input_norm.mean.size(); }
};

namespace detail {

inline std::vector<std::vector<double>> log_magnitudes(const std::vector<dsp::ComplexSpectrum>& spectra,
                                                       double offset) {
  std::vector<std::vector<double>> out;
  out.reserve(spectra.size());
  for (const auto& s : spectra) {
    std::vector<double> row(s.bins.size());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = std::log(std::abs(s.bins[k]) + offset);
    out.push_back(std::move(row));
  }
  return out;
}

inline neural::Matrix normalized(const std::vector<std::vector<double>>& rows, const BinNormalizer& n) {
  neural::Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n.mean.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < n.mean.size(); ++k) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (rows[i][k] - n.mean[k]) / n.scale[k];
    }
  }
  return x;
}

}  // namespace detail

/// Builds (noisy, clean) frame pairs by mixing every clean recording with
/// every profile, then fits an MLP on MSE between normalized log magnitudes.
inline DAEModel train_dae(const std::vector<dsp::Waveform>& clean_corpus, const std::vector<NoiseProfile>& profiles,
                          const DaeConfig& cfg = {}) {
  require(!clean_corpus.empty(), ErrorCode::kEmptyCorpus, "denoiser training needs at least one clean recording");
  require(!profiles.empty(), ErrorCode::kBadConfig, "denoiser training needs at least one noise profile");
  require(cfg.mixes_per_profile >= 1, ErrorCode::kBadConfig, "mixes_per_profile must be at least 1");
  const int sr = clean_corpus.front().sample_rate;
  for (const auto& w : clean_corpus) {
    require(w.sample_rate == sr, ErrorCode::kInvalidArgument, "clean corpus mixes sample rates");
  }
  const auto stft = dsp::Stft::for_duration(sr, cfg.frame_s);

  std::vector<std::vector<dsp::ComplexSpectrum>> clean_spectra;
  double peak = 0.0;
  for (const auto& clean : clean_corpus) {
    clean_spectra.push_back(stft.analyze(clean.samples));
    for (const auto& s : clean_spectra.back()) {
      for (const auto& b : s.bins) peak = std::max(peak, std::abs(b));
    }
  }
  require(peak > 0.0, ErrorCode::kSilentInput, "clean corpus is silent");

  DAEModel model;
  model.sample_rate = sr;
  model.frame_length = stft.frame_length();
  model.log_offset = kRelativeLogFloor * peak;

  std::vector<std::vector<double>> noisy_rows;
  std::vector<std::vector<double>> clean_rows;
  std::uint64_t mix_seed = cfg.seed;
  for (std::size_t c = 0; c < clean_corpus.size(); ++c) {
    const auto clean_lm = detail::log_magnitudes(clean_spectra[c], model.log_offset);
    for (const auto& profile : profiles) {
      for (int copy = 0; copy < cfg.mixes_per_profile; ++copy) {
        const auto noisy = mix_noise(clean_corpus[c], profile, ++mix_seed);
        const auto noisy_lm = detail::log_magnitudes(stft.analyze(noisy.samples), model.log_offset);
        noisy_rows.insert(noisy_rows.end(), noisy_lm.begin(), noisy_lm.end());
        clean_rows.insert(clean_rows.end(), clean_lm.begin(), clean_lm.end());
      }
    }
  }

  const std::size_t f = stft.bin_count();
  model.input_norm = BinNormalizer::fit(noisy_rows, f);
  model.target_norm = BinNormalizer::fit(clean_rows, f);

  std::vector<int> widths = {static_cast<int>(f)};
  if (cfg.hidden_widths.empty()) {
    widths.push_back(static_cast<int>(f / 2));
  } else {
    widths.insert(widths.end(), cfg.hidden_widths.begin(), cfg.hidden_widths.end());
  }
  widths.push_back(static_cast<int>(f));
  model.network = neural::init_model(neural::make_config(widths, neural::OutputActivation::kLinear, 0.0, cfg.seed));

  const neural::Dataset data{detail::normalized(noisy_rows, model.input_norm),
                             detail::normalized(clean_rows, model.target_norm)};
  model.initial_loss = neural::evaluate_loss(model.network, data, neural::LossKind::kMse).loss;
  neural::TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.seed = cfg.seed;
  auto result = neural::train(model.network, data, {}, tc, neural::LossKind::kMse);
  model.network = std::move(result.model);
  for (const auto& h : result.history) model.loss_history.push_back(h.train_loss);
  model.final_loss = model.loss_history.empty() ? model.initial_loss : model.loss_history.back();
  return model;
}

/// Cleans magnitudes frame by frame and resynthesizes with the noisy phase.
/// The network can only attenuate a bin, never amplify it.
inline dsp::Waveform apply_dae(const DAEModel& model, const dsp::Waveform& noisy) {
  dsp::validate(noisy);
  if (noisy.empty()) return noisy;
  const dsp::Waveform audio = noisy.sample_rate == model.sample_rate ? noisy : dsp::resample(noisy, model.sample_rate);
  const dsp::Stft stft(model.sample_rate, model.frame_length);
  require(stft.bin_count() == model.bins(), ErrorCode::kShapeError, "denoiser frame size does not match its network");
  auto spectra = stft.analyze(audio.samples);
  const auto pred = neural::predict(
      model.network, detail::normalized(detail::log_magnitudes(spectra, model.log_offset), model.input_norm));
  const auto& out = model.target_norm;
  for (std::size_t t = 0; t < spectra.size(); ++t) {
    for (std::size_t k = 0; k < model.bins(); ++k) {
      auto& bin = spectra[t].bins[k];
      const double mag = std::abs(bin);
      if (mag <= 0.0) continue;
      const double z = pred(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      const double cleaned = std::max(0.0, std::exp(z * out.scale[k] + out.mean[k]) - model.log_offset);
      bin *= std::min(mag, cleaned) / mag;
    }
  }
  dsp::Waveform result{stft.synthesize(spectra, audio.size()), model.sample_rate};
  if (result.sample_rate != noisy.sample_rate) {
    result = dsp::resample(result, noisy.sample_rate);
    result.samples.resize(noisy.size(), 0.0);
  }
  return result;
}

inline nlohmann::json dae_to_json(const DAEModel& m) {
  return {{"format_version", 1},
          {"sample_rate", m.sample_rate},
          {"frame_length", m.frame_length},
          {"log_offset", m.log_offset},
          {"input_mean", m.input_norm.mean},
          {"input_scale", m.input_norm.scale},
          {"target_mean", m.target_norm.mean},
          {"target_scale", m.target_norm.scale},
          {"initial_loss", m.initial_loss},
          {"final_loss", m.final_loss},
          {"loss_history", m.loss_history},
          {"network", neural::model_to_json(m.network)}};
}

inline DAEModel dae_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format_version").get<int>() == 1, ErrorCode::kVersionError, "unsupported denoiser format");
    DAEModel m;
    m.sample_rate = j.at("sample_rate").get<int>();
    m.frame_length = j.at("frame_length").get<std::size_t>();
    m.log_offset = j.at("log_offset").get<double>();
    m.input_norm = {j.at("input_mean").get<std::vector<double>>(), j.at("input_scale").get<std::vector<double>>()};
    m.target_norm = {j.at("target_mean").get<std::vector<double>>(), j.at("target_scale").get<std::vector<double>>()};
    m.initial_loss = j.at("initial_loss").get<double>();
    m.final_loss = j.at("final_loss").get<double>();
    m.loss_history = j.value("loss_history", std::vector<double>{});
    m.network = neural::model_from_json(j.at("network"));
    const auto f = static_cast<std::size_t>(m.network.input_width());
    for (const auto* v : {&m.input_norm.mean, &m.input_norm.scale, &m.target_norm.mean, &m.target_norm.scale}) {
      require(v->size() == f, ErrorCode::kFormatError, "denoiser normalization does not match its network");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed denoiser file: ") + e.what());
  }
}

}  // namespace voxbm::conditioning
