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

// Column encoding. fit_preprocess learns z-score statistics and category
// lists from one table (the real training split); apply_preprocess replays
// them on any table with the same raw columns.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/core/table.hpp"
#include "voxbm/experiments/dataset.hpp"

namespace voxbm::experiments {

inline constexpr int kPreprocessFormatVersion = 1;

enum class TransformKind { kZscore, kOnehot, kPassthrough };

inline std::string transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::kZscore: return "zscore";
    case TransformKind::kOnehot: return "onehot";
    case TransformKind::kPassthrough: return "passthrough";
  }
  return "passthrough";
}

inline TransformKind parse_transform(const std::string& s) {
  if (s == "zscore") return TransformKind::kZscore;
  if (s == "onehot") return TransformKind::kOnehot;
  if (s == "passthrough") return TransformKind::kPassthrough;
  fail(ErrorCode::kFormatError, "unknown transform '" + s + "'");
}

struct ColumnTransform {
  std::string column;
  TransformKind kind = TransformKind::kPassthrough;
  double mean = 0.0;
  double sd = 1.0;  // divisor actually used; a constant column keeps 1
  std::vector<std::string> categories;
};

struct PreprocessRecord {
  std::vector<ColumnTransform> transforms;
  CleanReport cleaning;

  std::vector<std::string> output_columns() const {
    std::vector<std::string> out;
    for (const auto& t : transforms) {
      if (t.kind == TransformKind::kOnehot) {
        for (const auto& c : t.categories) out.push_back(t.column + "=" + c);
      } else {
        out.push_back(t.column);
      }
    }
    return out;
  }

  /// Raw columns the record needs, split by kind.
  std::vector<std::string> numeric_inputs() const {
    std::vector<std::string> out;
    for (const auto& t : transforms) {
      if (t.kind != TransformKind::kOnehot) out.push_back(t.column);
    }
    return out;
  }
  std::vector<std::string> categorical_inputs() const {
    std::vector<std::string> out;
    for (const auto& t : transforms) {
      if (t.kind == TransformKind::kOnehot) out.push_back(t.column);
    }
    return out;
  }
};

inline PreprocessRecord fit_preprocess(const RawTable& t, const std::vector<std::string>& passthrough = {}) {
  require(!t.empty(), ErrorCode::kEmptyDataset, "cannot fit preprocessing on an empty table");
  PreprocessRecord rec;
  for (std::size_t c = 0; c < t.numeric_columns.size(); ++c) {
    ColumnTransform tr;
    tr.column = t.numeric_columns[c];
    if (std::find(passthrough.begin(), passthrough.end(), tr.column) != passthrough.end()) {
      tr.kind = TransformKind::kPassthrough;
    } else {
      std::vector<double> col;
      for (const auto& r : t.numeric) col.push_back(r[c]);
      tr.kind = TransformKind::kZscore;
      tr.mean = stats::mean(col);
      const double sd = stats::stddev(col);
      tr.sd = sd > 0.0 ? sd : 1.0;
    }
    rec.transforms.push_back(std::move(tr));
  }
  for (std::size_t c = 0; c < t.categorical_columns.size(); ++c) {
    std::set<std::string> cats;
    for (const auto& r : t.categorical) cats.insert(r[c]);
    rec.transforms.push_back({t.categorical_columns[c], TransformKind::kOnehot, 0.0, 1.0, {cats.begin(), cats.end()}});
  }
  return rec;
}

/// Encodes one row given lookups for its raw cells. An unseen category
/// encodes as all zeros.
template <typename NumFn, typename CatFn>
std::vector<double> encode_row(const PreprocessRecord& rec, NumFn&& numeric, CatFn&& categorical) {
  std::vector<double> out;
  for (const auto& t : rec.transforms) {
    switch (t.kind) {
      case TransformKind::kZscore: out.push_back((numeric(t.column) - t.mean) / t.sd); break;
      case TransformKind::kPassthrough: out.push_back(numeric(t.column)); break;
      case TransformKind::kOnehot: {
        const std::string v = categorical(t.column);
        for (const auto& c : t.categories) out.push_back(c == v ? 1.0 : 0.0);
        break;
      }
    }
  }
  return out;
}

inline FeatureTable apply_preprocess(const PreprocessRecord& rec, const RawTable& t) {
  std::map<std::string, std::size_t> num_idx;
  std::map<std::string, std::size_t> cat_idx;
  for (std::size_t c = 0; c < t.numeric_columns.size(); ++c) num_idx[t.numeric_columns[c]] = c;
  for (std::size_t c = 0; c < t.categorical_columns.size(); ++c) cat_idx[t.categorical_columns[c]] = c;
  for (const auto& name : rec.numeric_inputs()) {
    require(num_idx.count(name) > 0, ErrorCode::kSchemaError, "table lacks numeric column '" + name + "'");
  }
  for (const auto& name : rec.categorical_inputs()) {
    require(cat_idx.count(name) > 0, ErrorCode::kSchemaError, "table lacks categorical column '" + name + "'");
  }
  FeatureTable out;
  out.columns = rec.output_columns();
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto row = encode_row(
        rec, [&](const std::string& c) { return t.numeric[i][num_idx.at(c)]; },
        [&](const std::string& c) { return t.categorical[i][cat_idx.at(c)]; });
    out.add_row(std::move(row), t.labels[i], t.subject_ids[i]);
  }
  return out;
}

struct EncodedTable {
  FeatureTable table;
  PreprocessRecord record;
};

/// Fits on `t` itself and applies. Use fit_preprocess on the training split
/// when the table will be partitioned afterwards.
inline EncodedTable encode_and_normalize(const RawTable& t) {
  auto rec = fit_preprocess(t);
  auto table = apply_preprocess(rec, t);
  return {std::move(table), std::move(rec)};
}

inline nlohmann::json preprocess_to_json(const PreprocessRecord& rec) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& t : rec.transforms) {
    nlohmann::json j = {{"column", t.column}, {"transform", transform_name(t.kind)}};
    if (t.kind == TransformKind::kZscore) {
      j["mean"] = t.mean;
      j["sd"] = t.sd;
    }
    if (t.kind == TransformKind::kOnehot) j["categories"] = t.categories;
    cols.push_back(std::move(j));
  }
  return {{"format_version", kPreprocessFormatVersion}, {"columns", cols}, {"cleaning", clean_report_json(rec.cleaning)}};
}

inline PreprocessRecord preprocess_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format_version").get<int>() == kPreprocessFormatVersion, ErrorCode::kVersionError,
            "unsupported preprocessing record version");
    PreprocessRecord rec;
    for (const auto& c : j.at("columns")) {
      ColumnTransform t;
      t.column = c.at("column").get<std::string>();
      t.kind = parse_transform(c.at("transform").get<std::string>());
      if (t.kind == TransformKind::kZscore) {
        t.mean = c.at("mean").get<double>();
        t.sd = c.at("sd").get<double>();
        require(t.sd > 0.0, ErrorCode::kFormatError, "non-positive sd for '" + t.column + "'");
      }
      if (t.kind == TransformKind::kOnehot) t.categories = c.at("categories").get<std::vector<std::string>>();
      rec.transforms.push_back(std::move(t));
    }
    if (j.contains("cleaning")) {
      for (const auto& d : j["cleaning"].at("dropped_rows")) {
        rec.cleaning.dropped.push_back({d.at("row").get<std::size_t>(), d.at("reason").get<std::string>()});
      }
      for (const auto& c : j["cleaning"].at("clipped_cells")) {
        rec.cleaning.clipped.push_back({c.at("row").get<std::size_t>(), c.at("column").get<std::string>(),
                                        c.at("original").get<double>(), c.at("clipped").get<double>()});
      }
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed preprocessing record: ") + e.what());
  }
}

}  // namespace voxbm::experiments
