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

// Configured conditioning chain: optional calibration, then one denoising
// stage. The same chain is applied to training and inference audio.

#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "voxbm/conditioning/calibration.hpp"
#include "voxbm/conditioning/denoise.hpp"
#include "voxbm/core/error.hpp"
#include "voxbm/dsp/waveform.hpp"

namespace voxbm::conditioning {

enum class DenoiseKind { kNone, kSpectralSubtract, kDae };

inline std::string denoise_name(DenoiseKind k) {
  switch (k) {
    case DenoiseKind::kNone: return "none";
    case DenoiseKind::kSpectralSubtract: return "spectral_subtract";
    case DenoiseKind::kDae: return "dae";
  }
  return "none";
}

inline DenoiseKind parse_denoise(const std::string& s) {
  if (s == "none") return DenoiseKind::kNone;
  if (s == "spectral_subtract") return DenoiseKind::kSpectralSubtract;
  if (s == "dae") return DenoiseKind::kDae;
  fail(ErrorCode::kBadConfig, "unknown denoise stage '" + s + "'");
}

struct ConditioningConfig {
  DenoiseKind denoise = DenoiseKind::kNone;
  double noise_head_s = 0.25;
  std::optional<CalibrationCurve> calibration;
  std::shared_ptr<const DAEModel> dae;  // required when denoise == kDae
  std::string dae_path;                 // where the DAE came from, for reports
};

inline void validate(const ConditioningConfig& c) {
  require(c.denoise != DenoiseKind::kDae || c.dae != nullptr, ErrorCode::kBadConfig,
          "the dae stage needs a trained model");
  require(c.noise_head_s >= 0.1, ErrorCode::kBadConfig, "noise head must be at least 0.1 s");
}

inline dsp::Waveform condition(const dsp::Waveform& w, const ConditioningConfig& c) {
  validate(c);
  dsp::Waveform out = c.calibration ? apply_calibration(w, *c.calibration) : w;
  switch (c.denoise) {
    case DenoiseKind::kNone: break;
    case DenoiseKind::kSpectralSubtract: out = spectral_subtract(out, c.noise_head_s); break;
    case DenoiseKind::kDae: out = apply_dae(*c.dae, out); break;
  }
  return out;
}

inline nlohmann::json conditioning_to_json(const ConditioningConfig& c) {
  nlohmann::json j = {{"denoise", denoise_name(c.denoise)}, {"noise_head_s", c.noise_head_s},
                      {"calibrated", c.calibration.has_value()}};
  if (!c.dae_path.empty()) j["dae_model"] = c.dae_path;
  return j;
}

/// Reads {"denoise", "noise_head_s", "dae_model", "calibration"}; the last two
/// are file paths.
inline ConditioningConfig conditioning_from_json(const nlohmann::json& j) {
  ConditioningConfig c;
  try {
    c.denoise = parse_denoise(j.value("denoise", std::string("none")));
    c.noise_head_s = j.value("noise_head_s", c.noise_head_s);
    if (j.contains("dae_model")) {
      c.dae_path = j["dae_model"].get<std::string>();
      std::ifstream in(c.dae_path);
      require(in.good(), ErrorCode::kStorageError, "cannot open DAE model '" + c.dae_path + "'");
      c.dae = std::make_shared<const DAEModel>(dae_from_json(nlohmann::json::parse(in)));
    }
    if (j.contains("calibration")) {
      const auto path = j["calibration"].get<std::string>();
      std::ifstream in(path);
      require(in.good(), ErrorCode::kStorageError, "cannot open calibration '" + path + "'");
      c.calibration = calibration_from_json(nlohmann::json::parse(in));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("bad conditioning config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace voxbm::conditioning
