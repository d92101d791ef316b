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

// Conditional GAN over tabular feature rows. Both networks see the class as a
// one-hot pair appended to their input. Features are z-scored, divided by 3
// and clipped to [-1, 1] so the generator's tanh output covers +/-3 sd.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"
#include "voxbm/core/table.hpp"
#include "voxbm/neural/mlp.hpp"
#include "voxbm/neural/serialize.hpp"
#include "voxbm/neural/train.hpp"

namespace voxbm::cgan {

using neural::Matrix;

inline constexpr int kLabelWidth = 2;
inline constexpr double kNormSpread = 3.0;
inline constexpr int kCganFormatVersion = 1;

struct CGANConfig {
  int latent_dim = 16;
  std::vector<int> generator_hidden = {64, 64};
  std::vector<int> discriminator_hidden = {64, 32};
  int epochs = 10000;
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

inline void validate(const CGANConfig& c) {
  require(c.epochs >= 1, ErrorCode::kBadConfig, "cGAN epochs must be at least 1");
  require(c.latent_dim >= 1, ErrorCode::kBadConfig, "latent dimension must be at least 1");
  require(c.batch_size >= 1, ErrorCode::kBadConfig, "batch size must be at least 1");
  require(c.learning_rate > 0.0, ErrorCode::kBadConfig, "learning rate must be positive");
}

struct CGANModel {
  neural::MLPModel generator;
  neural::MLPModel discriminator;
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> scale;
  int latent_dim = 0;

  std::size_t feature_count() const { return columns.size(); }
};

struct CGANTraining {
  CGANModel model;
  std::vector<double> g_loss;  // one entry per epoch
  std::vector<double> d_loss;
};

namespace detail {

inline Matrix one_hot(const std::vector<int>& labels) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), kLabelWidth);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return m;
}

inline Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows(), a.cols() + b.cols());
  m << a, b;
  return m;
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

inline Matrix normalize_rows(const FeatureTable& t, const CGANModel& m) {
  Matrix x(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(m.feature_count()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t f = 0; f < m.feature_count(); ++f) {
      const double z = (t.rows[i][f] - m.mean[f]) / (kNormSpread * m.scale[f]);
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = std::clamp(z, -1.0, 1.0);
    }
  }
  return x;
}

inline void scale_gradients(neural::Gradients& g, double s) {
  for (auto& w : g.weights) w *= s;
  for (auto& b : g.bias) b *= s;
}

inline void add_gradients(neural::Gradients& into, const neural::Gradients& g) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += g.weights[l];
    into.bias[l] += g.bias[l];
  }
}

inline Matrix constant(Eigen::Index rows, double v) { return Matrix::Constant(rows, 1, v); }

}  // namespace detail

/// Alternating updates: one discriminator step on a real batch and an equally
/// sized fake batch, then one generator step through the frozen discriminator.
/// An epoch is one pass over the real rows in shuffled mini-batches; the
/// reported losses are batch averages over the epoch.
inline CGANTraining train_cgan(const FeatureTable& real, const CGANConfig& cfg) {
  validate(cfg);
  require(!real.empty(), ErrorCode::kEmptyDataset, "cGAN training table is empty");
  require(real.count_label(0) > 0 && real.count_label(1) > 0, ErrorCode::kMissingClass,
          "cGAN training needs rows of both classes");

  const auto features = static_cast<int>(real.feature_count());
  CGANModel model;
  model.columns = real.columns;
  model.latent_dim = cfg.latent_dim;
  for (std::size_t f = 0; f < real.feature_count(); ++f) {
    const auto col = real.column(f);
    model.mean.push_back(stats::mean(col));
    model.scale.push_back(std::max(stats::stddev(col), 1e-12));
  }

  std::vector<int> gw = {cfg.latent_dim + kLabelWidth};
  gw.insert(gw.end(), cfg.generator_hidden.begin(), cfg.generator_hidden.end());
  gw.push_back(features);
  std::vector<int> dw = {features + kLabelWidth};
  dw.insert(dw.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
  dw.push_back(1);
  model.generator = neural::init_model(neural::make_config(gw, neural::OutputActivation::kTanh, 0.0, cfg.seed));
  model.discriminator =
      neural::init_model(neural::make_config(dw, neural::OutputActivation::kSigmoid, 0.0, cfg.seed + 1));

  neural::TrainConfig opt;
  opt.learning_rate = cfg.learning_rate;
  opt.beta1 = cfg.beta1;
  auto g_state = neural::adam_init(model.generator);
  auto d_state = neural::adam_init(model.discriminator);

  const Matrix x_all = detail::normalize_rows(real, model);
  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(real.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  CGANTraining out;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double g_sum = 0.0;
    double d_sum = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix x_real(b, features);
      std::vector<int> labels(end - start);
      for (std::size_t i = start; i < end; ++i) {
        x_real.row(static_cast<Eigen::Index>(i - start)) = x_all.row(order[i]);
        labels[i - start] = real.labels[static_cast<std::size_t>(order[i])];
      }
      const Matrix c = detail::one_hot(labels);

      // Discriminator: real -> 1, fake -> 0, loss averaged over the two halves.
      const Matrix fake = neural::forward(model.generator, detail::hcat(detail::gaussian(b, cfg.latent_dim, rng), c))
                              .output;
      const auto act_r = neural::forward(model.discriminator, detail::hcat(x_real, c), true);
      const auto act_f = neural::forward(model.discriminator, detail::hcat(fake, c), true);
      const auto loss_r = neural::bce_loss(act_r.output, detail::constant(b, 1.0));
      const auto loss_f = neural::bce_loss(act_f.output, detail::constant(b, 0.0));
      auto grad_d = neural::backward(model.discriminator, act_r, loss_r.grad);
      detail::add_gradients(grad_d, neural::backward(model.discriminator, act_f, loss_f.grad));
      detail::scale_gradients(grad_d, 0.5);
      neural::adam_step(model.discriminator, grad_d, d_state, opt);

      // Generator: make the updated discriminator call fresh fakes real.
      const auto act_g =
          neural::forward(model.generator, detail::hcat(detail::gaussian(b, cfg.latent_dim, rng), c), true);
      const auto act_dg = neural::forward(model.discriminator, detail::hcat(act_g.output, c), true);
      const auto loss_g = neural::bce_loss(act_dg.output, detail::constant(b, 1.0));
      const auto through_d = neural::backward(model.discriminator, act_dg, loss_g.grad);
      const Matrix grad_fake = through_d.input.leftCols(features);
      neural::adam_step(model.generator, neural::backward(model.generator, act_g, grad_fake), g_state, opt);

      d_sum += 0.5 * (loss_r.value + loss_f.value);
      g_sum += loss_g.value;
      ++steps;
    }
    out.d_loss.push_back(d_sum / steps);
    out.g_loss.push_back(g_sum / steps);
  }
  out.model = std::move(model);
  return out;
}

/// `n` synthetic rows of class `label`, in original feature units.
inline FeatureTable sample(const CGANModel& model, int label, std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::kInvalidArgument, "sample count must be at least 1");
  require(label == 0 || label == 1, ErrorCode::kInvalidArgument, "label must be 0 or 1");
  std::mt19937_64 rng(seed);
  const auto rows = static_cast<Eigen::Index>(n);
  const Matrix z = detail::gaussian(rows, model.latent_dim, rng);
  const Matrix y = neural::predict(model.generator, detail::hcat(z, detail::one_hot(std::vector<int>(n, label))));
  FeatureTable t;
  t.columns = model.columns;
  for (Eigen::Index i = 0; i < rows; ++i) {
    std::vector<double> v(model.feature_count());
    for (std::size_t f = 0; f < v.size(); ++f) {
      v[f] = model.mean[f] + kNormSpread * model.scale[f] * y(i, static_cast<Eigen::Index>(f));
    }
    t.add_row(std::move(v), label, {}, Provenance::kSynthetic);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Validation

struct SynthReport {
  std::vector<double> ks;  // per feature
  double correlation_max_deviation = 0.0;
  double auc = 0.5;  // real-vs-synthetic classifier, fold average

  double max_ks() const { return ks.empty() ? 0.0 : *std::max_element(ks.begin(), ks.end()); }
};

struct ValidationConfig {
  int folds = 5;
  std::vector<int> hidden = {16};
  int epochs = 60;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<double>> correlation_matrix(const FeatureTable& t) {
  const std::size_t f = t.feature_count();
  std::vector<std::vector<double>> cols(f);
  for (std::size_t c = 0; c < f; ++c) cols[c] = t.column(c);
  std::vector<std::vector<double>> r(f, std::vector<double>(f, 1.0));
  for (std::size_t a = 0; a < f; ++a) {
    for (std::size_t b = a + 1; b < f; ++b) r[a][b] = r[b][a] = stats::pearson(cols[a], cols[b]);
  }
  return r;
}

/// Fold average AUC of an MLP separating rows of `a` (label 0) from `b`
/// (label 1). Folds are stratified by source.
inline double two_sample_auc(const FeatureTable& a, const FeatureTable& b, const ValidationConfig& cfg) {
  const std::size_t f = a.feature_count();
  const std::size_t n = a.size() + b.size();
  std::vector<const std::vector<double>*> rows;
  std::vector<int> source;
  for (const auto& r : a.rows) rows.push_back(&r), source.push_back(0);
  for (const auto& r : b.rows) rows.push_back(&r), source.push_back(1);

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> fold(n);
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (source[i] == s) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(cfg.folds));
  }

  double total = 0.0;
  int used = 0;
  for (int k = 0; k < cfg.folds; ++k) {
    std::vector<std::size_t> tr;
    std::vector<std::size_t> te;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == k ? te : tr).push_back(i);
    if (te.empty() || tr.empty()) continue;
    std::vector<double> mu(f, 0.0);
    std::vector<double> sd(f, 0.0);
    for (std::size_t i : tr) {
      for (std::size_t c = 0; c < f; ++c) mu[c] += (*rows[i])[c];
    }
    for (double& m : mu) m /= static_cast<double>(tr.size());
    for (std::size_t i : tr) {
      for (std::size_t c = 0; c < f; ++c) sd[c] += ((*rows[i])[c] - mu[c]) * ((*rows[i])[c] - mu[c]);
    }
    for (double& s : sd) s = std::max(std::sqrt(s / static_cast<double>(tr.size())), 1e-12);
    auto build = [&](const std::vector<std::size_t>& idx) {
      neural::Dataset d{Matrix(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(f)),
                        Matrix(static_cast<Eigen::Index>(idx.size()), 1)};
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < f; ++c) {
          d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ((*rows[idx[r]])[c] - mu[c]) / sd[c];
        }
        d.y(static_cast<Eigen::Index>(r), 0) = source[idx[r]];
      }
      return d;
    };
    const auto train_set = build(tr);
    const auto test_set = build(te);
    std::vector<int> widths = {static_cast<int>(f)};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);
    auto net = neural::init_model(
        neural::make_config(widths, neural::OutputActivation::kSigmoid, 0.0, cfg.seed + static_cast<std::uint64_t>(k)));
    neural::TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed + static_cast<std::uint64_t>(k);
    net = neural::train(net, train_set, {}, tc, neural::LossKind::kBce).model;
    const Matrix p = neural::predict(net, test_set.x);
    std::vector<double> scores(te.size());
    std::vector<int> labels(te.size());
    for (std::size_t r = 0; r < te.size(); ++r) {
      scores[r] = p(static_cast<Eigen::Index>(r), 0);
      labels[r] = source[te[r]];
    }
    total += stats::roc_auc(scores, labels);
    ++used;
  }
  return used > 0 ? total / used : 0.5;
}

}  // namespace detail

inline SynthReport validate_synthetic(const FeatureTable& real, const FeatureTable& synth,
                                      const ValidationConfig& cfg = {}) {
  require_same_schema(real, synth);
  require(!real.empty() && !synth.empty(), ErrorCode::kEmptyDataset, "validation needs non-empty tables");
  SynthReport r;
  for (std::size_t c = 0; c < real.feature_count(); ++c) r.ks.push_back(stats::ks_statistic(real.column(c), synth.column(c)));
  const auto cr = detail::correlation_matrix(real);
  const auto cs = detail::correlation_matrix(synth);
  for (std::size_t a = 0; a < cr.size(); ++a) {
    for (std::size_t b = 0; b < cr.size(); ++b) {
      r.correlation_max_deviation = std::max(r.correlation_max_deviation, std::abs(cr[a][b] - cs[a][b]));
    }
  }
  r.auc = detail::two_sample_auc(real, synth, cfg);
  return r;
}

// ---------------------------------------------------------------------------
// Augmentation

struct Gates {
  double max_ks = 0.3;
  double max_auc = 0.8;
};

struct AugmentResult {
  FeatureTable table;
  bool accepted = false;
  std::size_t synthetic_rows = 0;
  std::optional<SynthReport> report;  // absent when nothing was generated
  std::vector<std::string> rejection_reasons;
};

inline std::vector<std::string> gate_failures(const SynthReport& r, const Gates& g, const std::vector<std::string>& columns) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < r.ks.size(); ++c) {
    if (!(r.ks[c] <= g.max_ks)) {
      std::ostringstream s;
      s << "ks(" << columns[c] << ") = " << r.ks[c] << " > " << g.max_ks;
      out.push_back(s.str());
    }
  }
  if (!(r.auc <= g.max_auc)) {
    std::ostringstream s;
    s << "auc = " << r.auc << " > " << g.max_auc;
    out.push_back(s.str());
  }
  return out;
}

/// Appends `synthetic` to `real` if it passes the gates.
inline AugmentResult augment_with(const FeatureTable& real, const FeatureTable& synthetic, const Gates& gates = {},
                                  const ValidationConfig& vcfg = {}) {
  AugmentResult out;
  out.table = real;
  if (synthetic.empty()) {
    out.accepted = true;
    return out;
  }
  out.report = validate_synthetic(real, synthetic, vcfg);
  out.rejection_reasons = gate_failures(*out.report, gates, real.columns);
  out.accepted = out.rejection_reasons.empty();
  if (out.accepted) {
    out.table.append(synthetic);
    out.synthetic_rows = synthetic.size();
  }
  return out;
}

/// Generates round(ratio * |real|) rows split across classes in the real
/// table's class proportions, then gates them.
inline AugmentResult augment(const FeatureTable& real, const CGANModel& model, double ratio, const Gates& gates = {},
                             std::uint64_t seed = 0, const ValidationConfig& vcfg = {}) {
  require(ratio >= 0.0 && std::isfinite(ratio), ErrorCode::kInvalidArgument, "augmentation ratio must be >= 0");
  require(real.columns == model.columns, ErrorCode::kSchemaError, "cGAN was trained on different columns");
  const auto total = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(real.size())));
  const auto n1 = static_cast<std::size_t>(
      std::llround(static_cast<double>(total) * static_cast<double>(real.count_label(1)) / real.size()));
  const std::size_t n0 = total - n1;
  FeatureTable synthetic = real.empty_like();
  if (n0 > 0) synthetic.append(sample(model, 0, n0, seed));
  if (n1 > 0) synthetic.append(sample(model, 1, n1, seed + 1));
  return augment_with(real, synthetic, gates, vcfg);
}

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json cgan_to_json(const CGANModel& m) {
  return {{"format_version", kCganFormatVersion},
          {"latent_dim", m.latent_dim},
          {"columns", m.columns},
          {"mean", m.mean},
          {"scale", m.scale},
          {"generator", neural::model_to_json(m.generator)},
          {"discriminator", neural::model_to_json(m.discriminator)}};
}

inline CGANModel cgan_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format_version").get<int>() == kCganFormatVersion, ErrorCode::kVersionError,
            "unsupported cGAN format version");
    CGANModel m;
    m.latent_dim = j.at("latent_dim").get<int>();
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.mean = j.at("mean").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    m.generator = neural::model_from_json(j.at("generator"));
    m.discriminator = neural::model_from_json(j.at("discriminator"));
    const auto f = static_cast<int>(m.columns.size());
    require(m.mean.size() == m.columns.size() && m.scale.size() == m.columns.size() &&
                m.generator.input_width() == m.latent_dim + kLabelWidth && m.generator.output_width() == f &&
                m.discriminator.input_width() == f + kLabelWidth && m.discriminator.output_width() == 1,
            ErrorCode::kFormatError, "cGAN envelope widths do not chain");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed cGAN file: ") + e.what());
  }
}

/// epoch,g_loss,d_loss with 1-based epochs.
inline std::string loss_history_csv(const CGANTraining& t) {
  std::ostringstream s;
  s.precision(10);
  s << "epoch,g_loss,d_loss\n";
  for (std::size_t i = 0; i < t.g_loss.size(); ++i) s << i + 1 << ',' << t.g_loss[i] << ',' << t.d_loss[i] << '\n';
  return s.str();
}

}  // namespace voxbm::cgan
