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

// Rectangular numeric table with a binary label column, shared by the cGAN,
// experiment and gateway code.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "voxbm/core/error.hpp"

namespace voxbm {

enum class Provenance { kReal, kSynthetic };

inline std::string provenance_name(Provenance p) { return p == Provenance::kReal ? "real" : "synthetic"; }

struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> subject_ids;  // empty string when unknown
  std::vector<Provenance> provenance;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t feature_count() const { return columns.size(); }

  void add_row(std::vector<double> values, int label, std::string subject = {},
               Provenance origin = Provenance::kReal) {
    require(values.size() == columns.size(), ErrorCode::kSchemaError,
            "row has " + std::to_string(values.size()) + " values for " + std::to_string(columns.size()) + " columns");
    require(label == 0 || label == 1, ErrorCode::kSchemaError, "labels must be 0 or 1");
    rows.push_back(std::move(values));
    labels.push_back(label);
    subject_ids.push_back(std::move(subject));
    provenance.push_back(origin);
  }

  /// Same columns, no rows.
  FeatureTable empty_like() const {
    FeatureTable t;
    t.columns = columns;
    return t;
  }

  FeatureTable select(const std::vector<std::size_t>& idx) const {
    FeatureTable t = empty_like();
    for (std::size_t i : idx) t.add_row(rows.at(i), labels[i], subject_ids[i], provenance[i]);
    return t;
  }

  void append(const FeatureTable& other) {
    require(other.columns == columns, ErrorCode::kSchemaError, "cannot append tables with different columns");
    for (std::size_t i = 0; i < other.size(); ++i) {
      add_row(other.rows[i], other.labels[i], other.subject_ids[i], other.provenance[i]);
    }
  }

  std::size_t count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }
  std::size_t count_provenance(Provenance p) const {
    return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), p));
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }

  std::ptrdiff_t column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : it - columns.begin();
  }
};

inline void require_same_schema(const FeatureTable& a, const FeatureTable& b) {
  require(a.columns == b.columns, ErrorCode::kSchemaError, "tables have different feature columns");
}

}  // namespace voxbm
