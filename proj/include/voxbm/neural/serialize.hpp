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

// Versioned JSON model files:
// {format_version, config, layers: [{weights, bias}]}.

#include <string>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/neural/mlp.hpp"

namespace voxbm::neural {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const MLPModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["config"] = {{"layer_widths", m.config.layer_widths},
                 {"output_activation", activation_name(m.config.output_activation)},
                 {"dropout_rates", m.config.dropout_rates},
                 {"seed", m.config.seed}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      w.push_back(std::vector<double>(l.weights.row(r).data(), l.weights.row(r).data() + l.weights.cols()));
    }
    layers.push_back({{"weights", w}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  j["layers"] = layers;
  return j;
}

inline MLPModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.is_object() && j.contains("format_version"), ErrorCode::kFormatError, "missing format_version");
    const int version = j.at("format_version").get<int>();
    require(version == kModelFormatVersion, ErrorCode::kVersionError,
            "model format version " + std::to_string(version) + " is not supported (expected " +
                std::to_string(kModelFormatVersion) + ")");
    MLPModel m;
    const auto& c = j.at("config");
    m.config.layer_widths = c.at("layer_widths").get<std::vector<int>>();
    m.config.output_activation = parse_activation(c.at("output_activation").get<std::string>());
    m.config.dropout_rates = c.at("dropout_rates").get<std::vector<double>>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    try {
      validate(m.config);
    } catch (const Error& e) {
      fail(ErrorCode::kFormatError, "invalid stored config: " + e.detail());
    }
    const auto& layers = j.at("layers");
    require(layers.is_array() && layers.size() == m.config.layer_count(), ErrorCode::kFormatError,
            "layer count does not match the config");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const int in = m.config.layer_widths[l];
      const int out = m.config.layer_widths[l + 1];
      const auto& w = layers[l].at("weights");
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      require(w.is_array() && static_cast<int>(w.size()) == in && static_cast<int>(bias.size()) == out,
              ErrorCode::kFormatError, "layer " + std::to_string(l) + " has the wrong shape");
      Layer layer{Matrix(in, out), RowVector(out)};
      for (int r = 0; r < in; ++r) {
        const auto row = w[static_cast<std::size_t>(r)].get<std::vector<double>>();
        require(static_cast<int>(row.size()) == out, ErrorCode::kFormatError, "ragged weight matrix");
        for (int k = 0; k < out; ++k) layer.weights(r, k) = row[static_cast<std::size_t>(k)];
      }
      for (int k = 0; k < out; ++k) layer.bias[k] = bias[static_cast<std::size_t>(k)];
      m.layers.push_back(std::move(layer));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed model file: ") + e.what());
  }
}

inline std::string save_model(const MLPModel& m) { return model_to_json(m).dump(); }

inline MLPModel load_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("model file is not JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace voxbm::neural
