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

// Binary classification metrics and the classifier used by experiments.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/core/table.hpp"
#include "voxbm/neural/mlp.hpp"
#include "voxbm/neural/train.hpp"

namespace voxbm::experiments {

inline constexpr double kDefaultThreshold = 0.5;

struct Metrics {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;
  double threshold = kDefaultThreshold;
  double accuracy = 0.0;
  std::optional<double> precision;  // absent when nothing was predicted positive
  std::optional<double> recall;     // absent when there are no positives
  std::optional<double> f1;

  long long total() const { return tp + fp + tn + fn; }
};

inline Metrics metrics_from_counts(long long tp, long long fp, long long tn, long long fn,
                                   double threshold = kDefaultThreshold) {
  require(tp >= 0 && fp >= 0 && tn >= 0 && fn >= 0, ErrorCode::kInvalidArgument, "counts must be non-negative");
  Metrics m{tp, fp, tn, fn, threshold};
  require(m.total() > 0, ErrorCode::kEmptyDataset, "no predictions to score");
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.total());
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision && m.recall) {
    const double s = *m.precision + *m.recall;
    m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.recall / s : 0.0;
  }
  return m;
}

/// Threshold rule. 0 and below accept everything and 1 and above reject
/// everything, whatever the probability, so the boundary cases do not depend
/// on sigmoid saturation.
inline bool decide(double probability, double threshold) {
  if (threshold <= 0.0) return true;
  if (threshold >= 1.0) return false;
  return probability >= threshold;
}

inline Metrics score_predictions(const std::vector<double>& probabilities, const std::vector<int>& labels,
                                 double threshold = kDefaultThreshold) {
  require(probabilities.size() == labels.size(), ErrorCode::kShapeError, "one probability per label required");
  long long tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pos = decide(probabilities[i], threshold);
    if (pos) {
      (labels[i] == 1 ? tp : fp) += 1;
    } else {
      (labels[i] == 1 ? fn : tn) += 1;
    }
  }
  return metrics_from_counts(tp, fp, tn, fn, threshold);
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j = {{"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn},
                      {"threshold", m.threshold}, {"accuracy", m.accuracy}};
  if (m.precision) j["precision"] = *m.precision;
  if (m.recall) j["recall"] = *m.recall;
  if (m.f1) j["f1"] = *m.f1;
  return j;
}

inline std::string confusion_matrix_csv(const Metrics& m) {
  std::ostringstream s;
  s << "actual,predicted_0,predicted_1\n";
  s << "0," << m.tn << ',' << m.fp << '\n';
  s << "1," << m.fn << ',' << m.tp << '\n';
  return s.str();
}

// ---------------------------------------------------------------------------
// Classifier

struct ClassifierConfig {
  std::vector<int> hidden = {64, 32};
  double dropout = 0.2;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 100;
  int early_stop_patience = 10;
  std::uint64_t seed = 0;
};

inline neural::Dataset to_dataset(const FeatureTable& t) {
  neural::Dataset d{neural::Matrix(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(t.feature_count())),
                    neural::Matrix(static_cast<Eigen::Index>(t.size()), 1)};
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t c = 0; c < t.feature_count(); ++c) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = t.rows[i][c];
    }
    d.y(static_cast<Eigen::Index>(i), 0) = t.labels[i];
  }
  return d;
}

inline neural::TrainResult train_classifier(const FeatureTable& train_set, const FeatureTable& val_set,
                                            const ClassifierConfig& cfg) {
  require(!train_set.empty(), ErrorCode::kEmptyDataset, "training split is empty");
  if (!val_set.empty()) require_same_schema(train_set, val_set);
  std::vector<int> widths = {static_cast<int>(train_set.feature_count())};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(1);
  const auto model =
      neural::init_model(neural::make_config(widths, neural::OutputActivation::kSigmoid, cfg.dropout, cfg.seed));
  neural::TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.early_stop_patience = cfg.early_stop_patience;
  tc.seed = cfg.seed + 1;
  return neural::train(model, to_dataset(train_set), to_dataset(val_set), tc, neural::LossKind::kBce);
}

inline std::vector<double> predict_probabilities(const neural::MLPModel& model, const FeatureTable& t) {
  require(static_cast<int>(t.feature_count()) == model.input_width(), ErrorCode::kSchemaError,
          "table has " + std::to_string(t.feature_count()) + " features, model expects " +
              std::to_string(model.input_width()));
  if (t.empty()) return {};
  const auto p = neural::predict(model, to_dataset(t).x);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p(static_cast<Eigen::Index>(i), 0);
  return out;
}

inline Metrics evaluate(const neural::MLPModel& model, const FeatureTable& t, double threshold = kDefaultThreshold) {
  require(!t.empty(), ErrorCode::kEmptyDataset, "evaluation table is empty");
  return score_predictions(predict_probabilities(model, t), t.labels, threshold);
}

inline std::string training_curves_csv(const std::vector<neural::EpochRecord>& history) {
  std::ostringstream s;
  s.precision(17);
  s << "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  auto field = [&](double v) {
    if (std::isfinite(v)) s << v;
  };
  for (const auto& r : history) {
    s << r.epoch << ',';
    field(r.train_loss);
    s << ',';
    field(r.train_accuracy);
    s << ',';
    field(r.val_loss);
    s << ',';
    field(r.val_accuracy);
    s << '\n';
  }
  return s.str();
}

}  // namespace voxbm::experiments
