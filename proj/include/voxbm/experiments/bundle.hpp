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

// A trained classifier together with everything needed to score new data:
// the preprocessing record, the decision threshold and the input schema.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/experiments/dataset.hpp"
#include "voxbm/experiments/metrics.hpp"
#include "voxbm/experiments/preprocess.hpp"
#include "voxbm/neural/serialize.hpp"

namespace voxbm::experiments {

inline constexpr int kBundleSchemaVersion = 1;

enum class SchemaKind { kUci, kProtocol };

inline std::string schema_kind_name(SchemaKind k) { return k == SchemaKind::kUci ? "uci" : "protocol"; }

inline SchemaKind parse_schema_kind(const std::string& s) {
  if (s == "uci") return SchemaKind::kUci;
  if (s == "protocol") return SchemaKind::kProtocol;
  fail(ErrorCode::kFormatError, "unknown schema kind '" + s + "'");
}

/// A table whose inputs include any UCI acoustic column is UCI-schema.
inline SchemaKind infer_schema(const PreprocessRecord& rec) {
  const auto& uci = uci_feature_columns();
  for (const auto& c : rec.numeric_inputs()) {
    if (std::find(uci.begin(), uci.end(), c) != uci.end()) return SchemaKind::kUci;
  }
  return SchemaKind::kProtocol;
}

struct ModelBundle {
  std::string model_id;
  SchemaKind schema = SchemaKind::kProtocol;
  PreprocessRecord preprocess;
  neural::MLPModel network;
  double threshold = kDefaultThreshold;

  /// Probability for one raw row given by column name.
  double probability(const std::map<std::string, double>& numeric,
                     const std::map<std::string, std::string>& categorical = {}) const {
    const auto row = encode_row(
        preprocess,
        [&](const std::string& c) {
          const auto it = numeric.find(c);
          require(it != numeric.end(), ErrorCode::kSchemaError, "missing model input '" + c + "'");
          return it->second;
        },
        [&](const std::string& c) {
          const auto it = categorical.find(c);
          return it == categorical.end() ? std::string() : it->second;
        });
    neural::Matrix x(1, static_cast<Eigen::Index>(row.size()));
    for (std::size_t i = 0; i < row.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = row[i];
    require(x.cols() == network.input_width(), ErrorCode::kSchemaError, "preprocessing does not match the network");
    return neural::predict(network, x)(0, 0);
  }
};

/// FNV-1a over the serialized network, as 16 hex digits.
inline std::string fingerprint(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

inline ModelBundle make_bundle(PreprocessRecord rec, neural::MLPModel net, double threshold) {
  ModelBundle b;
  b.schema = infer_schema(rec);
  b.preprocess = std::move(rec);
  b.network = std::move(net);
  b.threshold = threshold;
  b.model_id = "mlp-" + fingerprint(neural::save_model(b.network) + preprocess_to_json(b.preprocess).dump());
  return b;
}

inline nlohmann::json bundle_to_json(const ModelBundle& b) {
  return {{"schema_version", kBundleSchemaVersion},
          {"model_id", b.model_id},
          {"schema", schema_kind_name(b.schema)},
          {"threshold", b.threshold},
          {"preprocess", preprocess_to_json(b.preprocess)},
          {"network", neural::model_to_json(b.network)}};
}

inline ModelBundle bundle_from_json(const nlohmann::json& j) {
  try {
    require(j.at("schema_version").get<int>() == kBundleSchemaVersion, ErrorCode::kVersionError,
            "unsupported model bundle version");
    ModelBundle b;
    b.model_id = j.at("model_id").get<std::string>();
    b.schema = parse_schema_kind(j.at("schema").get<std::string>());
    b.threshold = j.at("threshold").get<double>();
    b.preprocess = preprocess_from_json(j.at("preprocess"));
    b.network = neural::model_from_json(j.at("network"));
    require(static_cast<int>(b.preprocess.output_columns().size()) == b.network.input_width(),
            ErrorCode::kFormatError, "preprocessing output width does not match the network");
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed model bundle: ") + e.what());
  }
}

inline ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kStorageError, "cannot open model '" + path + "'");
  try {
    return bundle_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kFormatError, std::string("model file is not JSON: ") + e.what());
  }
}

/// Scores a raw table with the bundle's preprocessing and threshold.
inline Metrics evaluate(const ModelBundle& b, const RawTable& raw) {
  return evaluate(b.network, apply_preprocess(b.preprocess, raw), b.threshold);
}

}  // namespace voxbm::experiments
