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

// Dense feed-forward networks: ReLU hidden layers with optional inverted
// dropout and a sigmoid, tanh or linear output layer. Weights are stored
// in x out so a batch propagates as X * W + b.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voxbm/core/error.hpp"

namespace voxbm::neural {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class OutputActivation { kSigmoid, kLinear, kTanh };

inline std::string activation_name(OutputActivation a) {
  switch (a) {
    case OutputActivation::kSigmoid: return "sigmoid";
    case OutputActivation::kLinear: return "linear";
    case OutputActivation::kTanh: return "tanh";
  }
  return "linear";
}

inline OutputActivation parse_activation(const std::string& s) {
  if (s == "sigmoid") return OutputActivation::kSigmoid;
  if (s == "linear") return OutputActivation::kLinear;
  if (s == "tanh") return OutputActivation::kTanh;
  fail(ErrorCode::kFormatError, "unknown output activation '" + s + "'");
}

struct MLPConfig {
  std::vector<int> layer_widths;  // input first, output last
  OutputActivation output_activation = OutputActivation::kSigmoid;
  std::vector<double> dropout_rates;  // one per hidden layer
  std::uint64_t seed = 0;

  std::size_t layer_count() const { return layer_widths.size() - 1; }
  std::size_t hidden_count() const { return layer_widths.size() - 2; }
};

inline void validate(const MLPConfig& c) {
  require(c.layer_widths.size() >= 2, ErrorCode::kBadConfig, "a network needs at least input and output widths");
  for (int w : c.layer_widths) require(w > 0, ErrorCode::kBadConfig, "layer widths must be positive");
  require(c.dropout_rates.size() == c.hidden_count(), ErrorCode::kBadConfig,
          "need one dropout rate per hidden layer");
  for (double p : c.dropout_rates) {
    require(p >= 0.0 && p < 1.0, ErrorCode::kBadConfig, "dropout rates must lie in [0, 1)");
  }
}

/// Config with the same dropout rate on every hidden layer.
inline MLPConfig make_config(std::vector<int> widths, OutputActivation out, double dropout = 0.0,
                             std::uint64_t seed = 0) {
  MLPConfig c;
  c.layer_widths = std::move(widths);
  c.output_activation = out;
  c.dropout_rates.assign(c.layer_widths.size() >= 2 ? c.layer_widths.size() - 2 : 0, dropout);
  c.seed = seed;
  return c;
}

struct Layer {
  Matrix weights;  // in x out
  RowVector bias;  // out
};

struct MLPModel {
  MLPConfig config;
  std::vector<Layer> layers;

  int input_width() const { return config.layer_widths.front(); }
  int output_width() const { return config.layer_widths.back(); }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }
};

inline bool operator==(const MLPModel& a, const MLPModel& b) {
  if (a.config.layer_widths != b.config.layer_widths || a.config.output_activation != b.config.output_activation ||
      a.config.dropout_rates != b.config.dropout_rates || a.config.seed != b.config.seed ||
      a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weights != b.layers[i].weights || a.layers[i].bias != b.layers[i].bias) return false;
  }
  return true;
}

/// He-uniform limits for ReLU layers, Xavier-uniform for the output layer,
/// zero biases.
inline MLPModel init_model(const MLPConfig& config) {
  validate(config);
  MLPModel m;
  m.config = config;
  std::mt19937_64 rng(config.seed);
  for (std::size_t l = 0; l < config.layer_count(); ++l) {
    const int in = config.layer_widths[l];
    const int out = config.layer_widths[l + 1];
    const bool is_output = l + 1 == config.layer_count();
    const double limit = is_output ? std::sqrt(6.0 / (in + out)) : std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Matrix(in, out), RowVector::Zero(out)};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = dist(rng);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

/// Everything backward needs from one forward pass.
struct Activations {
  std::vector<Matrix> inputs;  // input to each layer (after dropout for hidden outputs)
  std::vector<Matrix> pre;     // pre-activation of each layer
  std::vector<Matrix> masks;   // dropout scale per hidden layer (empty when unused)
  Matrix output;
};

inline Matrix apply_output(const Matrix& z, OutputActivation a) {
  switch (a) {
    case OutputActivation::kSigmoid: return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case OutputActivation::kTanh: return z.array().tanh().matrix();
    case OutputActivation::kLinear: return z;
  }
  return z;
}

inline Activations forward(const MLPModel& model, const Matrix& x, bool train_mode = false, std::uint64_t seed = 0) {
  require(x.cols() == model.input_width(), ErrorCode::kShapeError,
          "input has " + std::to_string(x.cols()) + " columns, model expects " + std::to_string(model.input_width()));
  Activations act;
  std::mt19937_64 rng(seed);
  Matrix h = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    act.inputs.push_back(h);
    Matrix z = h * layer.weights;
    z.rowwise() += layer.bias;
    act.pre.push_back(z);
    if (l + 1 == model.layers.size()) {
      act.output = apply_output(z, model.config.output_activation);
      break;
    }
    h = z.cwiseMax(0.0);
    const double p = model.config.dropout_rates[l];
    if (train_mode && p > 0.0) {
      std::bernoulli_distribution keep(1.0 - p);
      Matrix mask(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
      h = h.cwiseProduct(mask);
      act.masks.push_back(std::move(mask));
    } else {
      act.masks.emplace_back();
    }
  }
  return act;
}

inline Matrix predict(const MLPModel& model, const Matrix& x) { return forward(model, x, false).output; }

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d loss / d output, same shape as the output
};

inline constexpr double kProbabilityClamp = 1e-12;

/// Mean binary cross-entropy over all entries.
inline LossResult bce_loss(const Matrix& p, const Matrix& y) {
  require(p.rows() == y.rows() && p.cols() == y.cols(), ErrorCode::kShapeError, "prediction and target shapes differ");
  require(p.size() > 0, ErrorCode::kShapeError, "empty batch");
  const double n = static_cast<double>(p.size());
  LossResult r;
  r.grad.resize(p.rows(), p.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p.data()[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double t = y.data()[i];
    acc -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
    r.grad.data()[i] = (q - t) / (q * (1.0 - q)) / n;
  }
  r.value = acc / n;
  return r;
}

/// Mean squared error over all entries.
inline LossResult mse_loss(const Matrix& p, const Matrix& y) {
  require(p.rows() == y.rows() && p.cols() == y.cols(), ErrorCode::kShapeError, "prediction and target shapes differ");
  require(p.size() > 0, ErrorCode::kShapeError, "empty batch");
  const double n = static_cast<double>(p.size());
  const Matrix d = p - y;
  return {d.squaredNorm() / n, 2.0 * d / n};
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<RowVector> bias;
  Matrix input;  // d loss / d network input
};

inline Gradients backward(const MLPModel& model, const Activations& act, const Matrix& loss_grad) {
  const std::size_t layers = model.layers.size();
  require(act.pre.size() == layers && act.inputs.size() == layers && act.masks.size() + 1 == layers,
          ErrorCode::kShapeError, "activations do not match the model depth");
  require(loss_grad.rows() == act.output.rows() && loss_grad.cols() == act.output.cols(), ErrorCode::kShapeError,
          "loss gradient shape does not match the output");
  for (std::size_t l = 0; l < layers; ++l) {
    require(act.inputs[l].cols() == model.layers[l].weights.rows() &&
                act.pre[l].cols() == model.layers[l].weights.cols() && act.pre[l].rows() == loss_grad.rows(),
            ErrorCode::kShapeError, "stale activations for layer " + std::to_string(l));
  }

  Gradients g;
  g.weights.resize(layers);
  g.bias.resize(layers);
  Matrix delta;
  switch (model.config.output_activation) {
    case OutputActivation::kSigmoid:
      delta = loss_grad.cwiseProduct(act.output.unaryExpr([](double p) { return p * (1.0 - p); }));
      break;
    case OutputActivation::kTanh:
      delta = loss_grad.cwiseProduct(act.output.unaryExpr([](double t) { return 1.0 - t * t; }));
      break;
    case OutputActivation::kLinear: delta = loss_grad; break;
  }
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = act.inputs[l].transpose() * delta;
    g.bias[l] = delta.colwise().sum();
    Matrix upstream = delta * model.layers[l].weights.transpose();
    if (l == 0) {
      g.input = std::move(upstream);
      break;
    }
    // The input of layer l is the (possibly dropped-out) ReLU of layer l-1.
    const auto& mask = act.masks[l - 1];
    if (mask.size() > 0) upstream = upstream.cwiseProduct(mask);
    delta = upstream.cwiseProduct(act.pre[l - 1].unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; }));
  }
  return g;
}

}  // namespace voxbm::neural
