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

// Session-level feature tables for models trained on protocol recordings.
// Column names are "<TASK>.<feature>", e.g. "TASK1.jitter_local_pct".

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "voxbm/biomarkers/summary.hpp"
#include "voxbm/core/task.hpp"
#include "voxbm/experiments/dataset.hpp"
#include "voxbm/experiments/fixtures.hpp"

namespace voxbm::experiments {

inline std::string protocol_column(TaskCode task, const std::string& feature) {
  return task_name(task) + "." + feature;
}

/// Present features of every task vector, keyed by protocol column name.
inline std::map<std::string, double> session_features(const std::vector<biomarkers::BVMVector>& tasks) {
  std::map<std::string, double> out;
  for (const auto& v : tasks) {
    for (const auto& [name, value] : v.entries()) out[protocol_column(v.task(), name)] = value;
  }
  return out;
}

/// Canonical column order: protocol task order, then feature order.
inline std::vector<std::string> protocol_columns(const std::vector<TaskCode>& tasks) {
  std::vector<std::string> out;
  for (TaskCode t : tasks) {
    for (const auto& f : biomarkers::task_features(t)) out.push_back(protocol_column(t, f));
  }
  return out;
}

/// One row per subject. Only columns measured for every subject are kept.
inline RawTable protocol_table(const std::vector<fixtures::LabeledRecording>& recordings,
                               const biomarkers::PitchConfig& pitch = {}) {
  std::map<std::string, std::vector<biomarkers::BVMVector>> by_subject;
  std::map<std::string, int> label;
  std::vector<TaskCode> tasks;
  for (const auto& r : recordings) {
    by_subject[r.subject_id].push_back(biomarkers::summarize_task(r.waveform, r.task, pitch));
    label[r.subject_id] = r.label;
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  std::sort(tasks.begin(), tasks.end());
  require(!by_subject.empty(), ErrorCode::kInsufficientData, "no recordings");

  std::map<std::string, std::map<std::string, double>> feats;
  for (const auto& [subject, vs] : by_subject) feats[subject] = session_features(vs);
  RawTable t;
  for (const auto& col : protocol_columns(tasks)) {
    const bool everywhere =
        std::all_of(feats.begin(), feats.end(), [&](const auto& kv) { return kv.second.count(col) > 0; });
    if (everywhere) t.numeric_columns.push_back(col);
  }
  require(!t.numeric_columns.empty(), ErrorCode::kInsufficientData, "no feature was measured for every subject");
  std::size_t row = 0;
  for (const auto& [subject, f] : feats) {
    std::vector<double> values;
    for (const auto& c : t.numeric_columns) values.push_back(f.at(c));
    t.numeric.push_back(std::move(values));
    t.categorical.emplace_back();
    t.labels.push_back(label.at(subject));
    t.subject_ids.push_back(subject);
    t.source_rows.push_back(++row);
  }
  return t;
}

/// CSV with subject_id first and status last, readable by ingest_csv.
inline std::string raw_table_csv(const RawTable& t) {
  std::ostringstream s;
  s.precision(17);
  s << "subject_id";
  for (const auto& c : t.numeric_columns) s << ',' << c;
  for (const auto& c : t.categorical_columns) s << ',' << c;
  s << ",status\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    s << t.subject_ids[i];
    for (double v : t.numeric[i]) s << ',' << v;
    for (const auto& v : t.categorical[i]) s << ',' << v;
    s << ',' << t.labels[i] << '\n';
  }
  return s.str();
}

}  // namespace voxbm::experiments
