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

// Finite-difference gradient check for MLP models.

#include <random>

#include "support/oracles.hpp"
#include "voxbm/neural/mlp.hpp"
#include "voxbm/neural/train.hpp"

namespace voxbm::testing {

using neural::Matrix;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  const auto v = random_vector(static_cast<std::size_t>(rows * cols), seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = v[static_cast<std::size_t>(i)];
  return m;
}

inline Matrix random_labels(Eigen::Index rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix y(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) y(i, 0) = static_cast<double>(rng() % 2);
  return y;
}

/// Loss of `model` on (x, y) as a function of one parameter.
inline double loss_at(neural::MLPModel model, const Matrix& x, const Matrix& y, std::size_t layer, Eigen::Index index,
                      bool is_bias, double value, neural::LossKind kind, bool train_mode = false, std::uint64_t seed = 0) {
  if (is_bias) {
    model.layers[layer].bias[index] = value;
  } else {
    model.layers[layer].weights.data()[index] = value;
  }
  return neural::compute_loss(kind, neural::forward(model, x, train_mode, seed).output, y).value;
}

inline double max_gradient_error(neural::MLPModel model, const Matrix& x, const Matrix& y, neural::LossKind kind,
                                 bool train_mode = false, std::uint64_t seed = 0) {
  // Non-zero biases keep pre-activations off the ReLU kink when a whole
  // upstream row is dropped out.
  std::uint64_t bias_seed = seed + 1000;
  for (auto& layer : model.layers) {
    const auto b = random_vector(static_cast<std::size_t>(layer.bias.size()), ++bias_seed, 0.1);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = b[static_cast<std::size_t>(i)];
  }
  const auto act = neural::forward(model, x, train_mode, seed);
  const auto grads = neural::backward(model, act, neural::compute_loss(kind, act.output, y).grad);
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (int pass = 0; pass < 2; ++pass) {
      const bool is_bias = pass == 1;
      const Eigen::Index count = is_bias ? model.layers[l].bias.size() : model.layers[l].weights.size();
      for (Eigen::Index i = 0; i < count; ++i) {
        const double base = is_bias ? model.layers[l].bias[i] : model.layers[l].weights.data()[i];
        const double numeric = central_difference(
            [&](double v) { return loss_at(model, x, y, l, i, is_bias, v, kind, train_mode, seed); }, base, h);
        const double analytic = is_bias ? grads.bias[l][i] : grads.weights[l].data()[i];
        worst = std::max(worst, relative_error(analytic, numeric, 1e-6));
      }
    }
  }
  return worst;
}

}  // namespace voxbm::testing
