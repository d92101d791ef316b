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

// Adam and the mini-batch training loop with early stopping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "voxbm/core/error.hpp"
#include "voxbm/neural/mlp.hpp"

namespace voxbm::neural {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 100;
  int early_stop_patience = 10;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& c) {
  require(c.beta1 > 0.0 && c.beta1 < 1.0 && c.beta2 > 0.0 && c.beta2 < 1.0, ErrorCode::kBadConfig,
          "Adam betas must lie in (0, 1)");
  require(c.batch_size >= 1, ErrorCode::kBadConfig, "batch size must be at least 1");
  require(c.epochs >= 0, ErrorCode::kBadConfig, "epochs must be non-negative");
  require(c.learning_rate > 0.0 && c.epsilon > 0.0, ErrorCode::kBadConfig, "learning rate and epsilon must be positive");
}

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<RowVector> m_b, v_b;
  long long t = 0;
};

inline AdamState adam_init(const MLPModel& model) {
  AdamState s;
  for (const auto& l : model.layers) {
    s.m_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    s.v_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    s.m_b.push_back(RowVector::Zero(l.bias.size()));
    s.v_b.push_back(RowVector::Zero(l.bias.size()));
  }
  return s;
}

inline void adam_step(MLPModel& model, const Gradients& g, AdamState& s, const TrainConfig& c) {
  if (s.m_w.empty()) s = adam_init(model);
  require(g.weights.size() == model.layers.size(), ErrorCode::kShapeError, "gradient depth does not match model");
  ++s.t;
  const double c1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.t));
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    const auto mhat = (m / c1).array();
    const auto vhat = (v / c2).array();
    param.array() -= c.learning_rate * mhat / (vhat.sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weights, g.weights[l], s.m_w[l], s.v_w[l]);
    update(model.layers[l].bias, g.bias[l], s.m_b[l], s.v_b[l]);
  }
}

enum class LossKind { kBce, kMse };

inline LossResult compute_loss(LossKind kind, const Matrix& p, const Matrix& y) {
  return kind == LossKind::kBce ? bce_loss(p, y) : mse_loss(p, y);
}

struct Dataset {
  Matrix x;
  Matrix y;

  Eigen::Index size() const { return x.rows(); }
  bool empty() const { return x.rows() == 0; }
};

inline Dataset take_rows(const Dataset& d, const std::vector<Eigen::Index>& rows) {
  Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), d.x.cols()),
              Matrix(static_cast<Eigen::Index>(rows.size()), d.y.cols())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = d.x.row(rows[i]);
    out.y.row(static_cast<Eigen::Index>(i)) = d.y.row(rows[i]);
  }
  return out;
}

/// Fraction of rows whose thresholded first output matches the label.
inline double binary_accuracy(const Matrix& p, const Matrix& y, double threshold = 0.5) {
  if (p.rows() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) hits += ((p(i, 0) >= threshold) == (y(i, 0) >= 0.5)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double train_accuracy = std::numeric_limits<double>::quiet_NaN();
  double val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  MLPModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool stopped_early = false;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
};

inline Evaluation evaluate_loss(const MLPModel& m, const Dataset& d, LossKind kind) {
  const Matrix p = predict(m, d.x);
  Evaluation e{compute_loss(kind, p, d.y).value};
  if (kind == LossKind::kBce) e.accuracy = binary_accuracy(p, d.y);
  return e;
}

/// Mini-batch training. Epoch losses are measured in eval mode on the full
/// sets after each epoch. With a validation set, training stops once its loss
/// has not improved for `early_stop_patience` epochs and the best weights are
/// restored.
inline TrainResult train(MLPModel model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
                         LossKind kind) {
  validate(cfg);
  require(!train_set.empty(), ErrorCode::kEmptyDataset, "training set is empty");
  require(train_set.y.rows() == train_set.x.rows() && train_set.y.cols() == model.output_width(),
          ErrorCode::kShapeError, "training targets do not match the model output");
  const bool use_val = !val_set.empty();

  TrainResult result{model, {}, 0, false};
  std::mt19937_64 rng(cfg.seed);
  AdamState state = adam_init(model);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto batch = take_rows(train_set, std::vector<Eigen::Index>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                                                        order.begin() + static_cast<std::ptrdiff_t>(end)));
      const auto act = forward(model, batch.x, true, rng());
      const auto loss = compute_loss(kind, act.output, batch.y);
      adam_step(model, backward(model, act, loss.grad), state, cfg);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    const auto tr = evaluate_loss(model, train_set, kind);
    rec.train_loss = tr.loss;
    rec.train_accuracy = tr.accuracy;
    if (use_val) {
      const auto va = evaluate_loss(model, val_set, kind);
      rec.val_loss = va.loss;
      rec.val_accuracy = va.accuracy;
    }
    result.history.push_back(rec);

    if (!use_val) {
      result.model = model;
      result.best_epoch = epoch;
      continue;
    }
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      result.model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace voxbm::neural
