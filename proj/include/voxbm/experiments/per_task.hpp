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

// Per-task screening accuracy with leave-one-subject-out evaluation.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/biomarkers/summary.hpp"
#include "voxbm/core/task.hpp"
#include "voxbm/experiments/dataset.hpp"
#include "voxbm/experiments/fixtures.hpp"
#include "voxbm/experiments/metrics.hpp"
#include "voxbm/experiments/preprocess.hpp"

namespace voxbm::experiments {

/// Published per-task accuracies, shown next to measured values for
/// comparison only.
inline std::optional<double> reference_task_accuracy(TaskCode t) {
  switch (t) {
    case TaskCode::kTask1:
    case TaskCode::kTask3: return 0.85;
    case TaskCode::kTask2: return 0.83;
    case TaskCode::kTask7: return 0.82;
    case TaskCode::kTask4: return 0.80;
    case TaskCode::kTask5: return 0.78;
    default: return std::nullopt;
  }
}

struct TaskAccuracy {
  TaskCode task = TaskCode::kTask1;
  std::optional<double> accuracy;  // absent when the task was excluded
  std::size_t recordings = 0;
  std::size_t subjects = 0;
  std::vector<std::string> features;
  std::string note;  // error code name when excluded
};

struct PerTaskConfig {
  ClassifierConfig classifier{{8}, 0.0, 1e-2, 16, 150, 10, 0};
  biomarkers::PitchConfig pitch;
};

namespace detail {

inline TaskAccuracy evaluate_task(TaskCode task, const std::vector<const fixtures::LabeledRecording*>& recs,
                                  const PerTaskConfig& cfg) {
  TaskAccuracy out;
  out.task = task;
  out.recordings = recs.size();
  std::set<std::string> subjects;
  std::set<int> classes;
  for (const auto* r : recs) {
    subjects.insert(r->subject_id);
    classes.insert(r->label);
  }
  out.subjects = subjects.size();
  if (classes.size() < 2 || subjects.size() < 3) {
    out.note = std::string(error_code_name(ErrorCode::kInsufficientData));
    return out;
  }

  std::vector<biomarkers::BVMVector> vs;
  for (const auto* r : recs) vs.push_back(biomarkers::summarize_task(r->waveform, task, cfg.pitch));
  RawTable t;
  for (const auto& f : biomarkers::task_features(task)) {
    if (std::all_of(vs.begin(), vs.end(), [&](const auto& v) { return v.has(f); })) t.numeric_columns.push_back(f);
  }
  if (t.numeric_columns.empty()) {
    out.note = std::string(error_code_name(ErrorCode::kInsufficientData));
    return out;
  }
  out.features = t.numeric_columns;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    std::vector<double> row;
    for (const auto& f : t.numeric_columns) row.push_back(vs[i].at(f));
    t.numeric.push_back(std::move(row));
    t.categorical.emplace_back();
    t.labels.push_back(recs[i]->label);
    t.subject_ids.push_back(recs[i]->subject_id);
    t.source_rows.push_back(i + 1);
  }

  std::size_t correct = 0;
  for (const auto& held : subjects) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < t.size(); ++i) (t.subject_ids[i] == held ? te : tr).push_back(i);
    const RawTable train_raw = t.select(tr);
    if (train_raw.count_label(0) == 0 || train_raw.count_label(1) == 0) {
      out.note = std::string(error_code_name(ErrorCode::kInsufficientData));
      return out;
    }
    const auto rec = fit_preprocess(train_raw);
    const auto model = train_classifier(apply_preprocess(rec, train_raw), FeatureTable{}, cfg.classifier).model;
    const auto test = apply_preprocess(rec, t.select(te));
    const auto p = predict_probabilities(model, test);
    for (std::size_t i = 0; i < p.size(); ++i) correct += decide(p[i], kDefaultThreshold) == (test.labels[i] == 1);
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(t.size());
  return out;
}

}  // namespace detail

/// Accuracy per task in task-code order. Tasks with a single class, fewer
/// than three subjects or no usable feature are reported with an
/// insufficient_data note; if every task is excluded, InsufficientData.
inline std::vector<TaskAccuracy> per_task_accuracy(const std::vector<fixtures::LabeledRecording>& corpus,
                                                   const PerTaskConfig& cfg = {}) {
  std::map<TaskCode, std::vector<const fixtures::LabeledRecording*>> by_task;
  for (const auto& r : corpus) by_task[r.task].push_back(&r);
  std::vector<TaskAccuracy> out;
  for (const auto& [task, recs] : by_task) out.push_back(detail::evaluate_task(task, recs, cfg));
  require(std::any_of(out.begin(), out.end(), [](const auto& a) { return a.accuracy.has_value(); }),
          ErrorCode::kInsufficientData, "no task has enough labelled subjects to evaluate");
  return out;
}

inline nlohmann::json per_task_json(const std::vector<TaskAccuracy>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"task_code", task_name(r.task)}, {"recordings", r.recordings}, {"subjects", r.subjects},
                        {"features", r.features}};
    if (r.accuracy) j["accuracy"] = *r.accuracy;
    if (!r.note.empty()) j["note"] = r.note;
    if (const auto ref = reference_task_accuracy(r.task)) j["reference_accuracy"] = *ref;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace voxbm::experiments
