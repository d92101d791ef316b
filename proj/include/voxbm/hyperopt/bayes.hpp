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

// Bayesian optimization with a Gaussian-process surrogate and expected
// improvement. Objectives are minimized.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "voxbm/core/error.hpp"
#include "voxbm/core/stats.hpp"

namespace voxbm::hyperopt {

enum class ParamKind { kContinuous, kInteger, kCategorical };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kContinuous;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
  std::vector<std::string> choices;

  static ParamSpec continuous(std::string name, double lo, double hi, bool log_scale = false) {
    return {std::move(name), ParamKind::kContinuous, lo, hi, log_scale, {}};
  }
  static ParamSpec integer(std::string name, long long lo, long long hi) {
    return {std::move(name), ParamKind::kInteger, static_cast<double>(lo), static_cast<double>(hi), false, {}};
  }
  static ParamSpec categorical(std::string name, std::vector<std::string> choices) {
    return {std::move(name), ParamKind::kCategorical, 0.0, 0.0, false, std::move(choices)};
  }

  /// Width of this parameter in the GP feature space.
  std::size_t encoded_width() const { return kind == ParamKind::kCategorical ? choices.size() : 1; }
};

struct SearchSpace {
  std::vector<ParamSpec> parameters;

  std::size_t encoded_width() const {
    std::size_t w = 0;
    for (const auto& p : parameters) w += p.encoded_width();
    return w;
  }
};

inline void validate(const SearchSpace& s) {
  require(!s.parameters.empty(), ErrorCode::kBadSpace, "search space has no parameters");
  for (const auto& p : s.parameters) {
    switch (p.kind) {
      case ParamKind::kContinuous:
      case ParamKind::kInteger:
        require(p.lo < p.hi, ErrorCode::kBadSpace, "parameter " + p.name + " needs lo < hi");
        require(!p.log_scale || p.lo > 0.0, ErrorCode::kBadSpace, "log-scale parameter " + p.name + " needs lo > 0");
        break;
      case ParamKind::kCategorical:
        require(!p.choices.empty(), ErrorCode::kBadSpace, "categorical parameter " + p.name + " has no choices");
        break;
    }
  }
}

using ParamValue = std::variant<double, long long, std::string>;
using Params = std::map<std::string, ParamValue>;

inline double as_double(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
  return std::stod(std::get<std::string>(v));
}

inline std::string format_value(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  std::ostringstream o;
  o.precision(17);
  o << std::get<double>(v);
  return o.str();
}

// ---------------------------------------------------------------------------
// Unit-cube mapping. Each parameter has one coordinate u in [0, 1] used for
// sampling; the GP sees continuous/integer coordinates directly and
// categorical parameters one-hot.

inline double to_unit(const ParamSpec& p, const ParamValue& v) {
  switch (p.kind) {
    case ParamKind::kContinuous: {
      const double x = as_double(v);
      if (p.log_scale) return (std::log(x) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
      return (x - p.lo) / (p.hi - p.lo);
    }
    case ParamKind::kInteger: return (as_double(v) - p.lo + 0.5) / (p.hi - p.lo + 1.0);
    case ParamKind::kCategorical: {
      const auto& s = std::get<std::string>(v);
      const auto it = std::find(p.choices.begin(), p.choices.end(), s);
      require(it != p.choices.end(), ErrorCode::kBadSpace, "value " + s + " is not a choice of " + p.name);
      return (static_cast<double>(it - p.choices.begin()) + 0.5) / static_cast<double>(p.choices.size());
    }
  }
  return 0.0;
}

inline ParamValue from_unit(const ParamSpec& p, double u) {
  u = std::clamp(u, 0.0, 1.0);
  switch (p.kind) {
    case ParamKind::kContinuous:
      if (p.log_scale) return std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)));
      return p.lo + u * (p.hi - p.lo);
    case ParamKind::kInteger: {
      const auto span = static_cast<long long>(p.hi - p.lo) + 1;
      const auto k = std::min(span - 1, static_cast<long long>(std::floor(u * static_cast<double>(span))));
      return static_cast<long long>(p.lo) + k;
    }
    case ParamKind::kCategorical: {
      const auto k = std::min(p.choices.size() - 1, static_cast<std::size_t>(std::floor(u * static_cast<double>(p.choices.size()))));
      return p.choices[k];
    }
  }
  return 0.0;
}

inline Params decode(const SearchSpace& s, const std::vector<double>& unit) {
  Params out;
  for (std::size_t i = 0; i < s.parameters.size(); ++i) out[s.parameters[i].name] = from_unit(s.parameters[i], unit[i]);
  return out;
}

inline std::vector<double> unit_coordinates(const SearchSpace& s, const Params& params) {
  std::vector<double> u;
  for (const auto& p : s.parameters) {
    const auto it = params.find(p.name);
    require(it != params.end(), ErrorCode::kBadSpace, "missing parameter " + p.name);
    u.push_back(to_unit(p, it->second));
  }
  return u;
}

/// GP feature vector: unit coordinates, categorical parameters one-hot.
inline Eigen::VectorXd encode(const SearchSpace& s, const Params& params) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.encoded_width()));
  Eigen::Index k = 0;
  for (const auto& p : s.parameters) {
    const auto& v = params.at(p.name);
    if (p.kind == ParamKind::kCategorical) {
      const auto idx = std::find(p.choices.begin(), p.choices.end(), std::get<std::string>(v)) - p.choices.begin();
      x(k + idx) = 1.0;
      k += static_cast<Eigen::Index>(p.choices.size());
    } else {
      x(k++) = to_unit(p, v);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Quasi-random initial design

inline constexpr std::size_t kInitialDesign = 5;
inline constexpr std::size_t kCandidates = 1024;

inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Point `index` of a Halton sequence with a seeded random shift per axis.
inline std::vector<double> halton_point(std::size_t index, std::size_t dims, std::uint64_t seed) {
  static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  require(dims <= std::size(kPrimes), ErrorCode::kBadSpace, "too many parameters for the initial design");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(0.0, 1.0);
  std::vector<double> u(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double v = radical_inverse(index + 1, kPrimes[d]) + shift(rng);
    u[d] = v - std::floor(v);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Gaussian process

inline constexpr double kObservationNoise = 1e-6;

inline std::vector<double> length_scale_grid() {
  std::vector<double> g;
  for (int i = 0; i < 16; ++i) g.push_back(0.02 * std::pow(100.0, i / 15.0));  // 0.02 .. 2
  return g;
}

/// Zero-mean GP with a unit-variance RBF kernel on standardized targets.
class GaussianProcess {
 public:
  GaussianProcess(std::vector<Eigen::VectorXd> x, const std::vector<double>& y) : x_(std::move(x)) {
    require(!x_.empty() && x_.size() == y.size(), ErrorCode::kInvalidArgument, "GP needs matching inputs and targets");
    y_mean_ = stats::mean(y);
    y_scale_ = std::max(stats::stddev(y), 1e-12);
    y_ = Eigen::VectorXd(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) y_(static_cast<Eigen::Index>(i)) = (y[i] - y_mean_) / y_scale_;
    double best = -std::numeric_limits<double>::infinity();
    for (double l : length_scale_grid()) {
      const double ll = fit(l);
      if (ll > best) {
        best = ll;
        length_scale_ = l;
      }
    }
    fit(length_scale_);
  }

  double length_scale() const { return length_scale_; }

  /// Log marginal likelihood of the standardized targets at length scale l.
  double log_marginal_likelihood(double l) { return fit(l); }

  /// Posterior mean and standard deviation in original target units.
  std::pair<double, double> predict(const Eigen::VectorXd& q) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(x_.size()));
    for (std::size_t i = 0; i < x_.size(); ++i) k(static_cast<Eigen::Index>(i)) = kernel(q, x_[i], length_scale_);
    const double mu = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    return {y_mean_ + y_scale_ * mu, y_scale_ * std::sqrt(var)};
  }

 private:
  static double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double l) {
    return std::exp(-(a - b).squaredNorm() / (2.0 * l * l));
  }

  double fit(double l) {
    const auto n = static_cast<Eigen::Index>(x_.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(j)], l);
    }
    double jitter = kObservationNoise;
    while (true) {
      llt_.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
      if (llt_.info() == Eigen::Success) break;
      jitter *= 10.0;
      require(jitter < 1.0, ErrorCode::kIllConditioned, "GP covariance is not positive definite");
    }
    alpha_ = llt_.solve(y_);
    const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    return -0.5 * y_.dot(alpha_) - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  }

  std::vector<Eigen::VectorXd> x_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double length_scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

/// Expected improvement below `best` for a minimized objective.
inline double expected_improvement(double mu, double sigma, double best) {
  if (!(sigma > 0.0)) return std::max(0.0, best - mu);
  const double z = (best - mu) / sigma;
  return std::max(0.0, (best - mu) * stats::normal_cdf(z) + sigma * stats::normal_pdf(z));
}

// ---------------------------------------------------------------------------
// Trials and the optimization loop

enum class TrialStatus { kOk, kFailed };

struct Trial {
  Params params;
  double objective = std::numeric_limits<double>::quiet_NaN();
  TrialStatus status = TrialStatus::kOk;
  std::string message;

  bool ok() const { return status == TrialStatus::kOk; }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// Next point to evaluate given the history so far.
inline Params propose(const std::vector<Trial>& history, const SearchSpace& space, std::uint64_t seed) {
  validate(space);
  std::vector<Eigen::VectorXd> x;
  std::vector<double> y;
  for (const auto& t : history) {
    if (!t.ok()) continue;
    x.push_back(encode(space, t.params));
    y.push_back(t.objective);
  }
  const std::size_t dims = space.parameters.size();
  if (history.size() < kInitialDesign || x.size() < 2) {
    return decode(space, halton_point(history.size(), dims, seed));
  }
  const GaussianProcess gp(x, y);
  const double best = *std::min_element(y.begin(), y.end());
  std::mt19937_64 rng(mix_seed(seed, history.size()));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Params chosen;
  double best_ei = -1.0;
  for (std::size_t c = 0; c < kCandidates; ++c) {
    std::vector<double> u(dims);
    for (double& v : u) v = uni(rng);
    auto params = decode(space, u);
    const auto [mu, sigma] = gp.predict(encode(space, params));
    const double ei = expected_improvement(mu, sigma, best);
    if (ei > best_ei) {
      best_ei = ei;
      chosen = std::move(params);
    }
  }
  return chosen;
}

using Objective = std::function<double(const Params&)>;

struct OptimizeResult {
  Trial best;
  std::vector<Trial> history;
  std::vector<double> best_so_far;  // NaN until the first successful trial
};

inline Trial run_trial(const Objective& objective, Params params) {
  Trial t;
  t.params = std::move(params);
  try {
    t.objective = objective(t.params);
    if (!std::isfinite(t.objective)) {
      t.status = TrialStatus::kFailed;
      t.message = "objective is not finite";
    }
  } catch (const std::exception& e) {
    t.status = TrialStatus::kFailed;
    t.message = e.what();
  }
  return t;
}

inline OptimizeResult summarize(std::vector<Trial> history) {
  OptimizeResult r;
  r.history = std::move(history);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : r.history) {
    if (t.ok() && t.objective < best) {
      best = t.objective;
      r.best = t;
    }
    r.best_so_far.push_back(std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN());
  }
  require(std::isfinite(best), ErrorCode::kNoSuccessfulTrial, "every trial failed");
  return r;
}

/// Runs until `budget` trials exist; `resume` supplies earlier trials, which
/// count toward the budget.
inline OptimizeResult optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
                               std::uint64_t seed, std::vector<Trial> resume = {},
                               const std::function<void(const Trial&)>& on_trial = {}) {
  validate(space);
  require(budget >= 1, ErrorCode::kInvalidArgument, "budget must be at least 1");
  std::vector<Trial> history = std::move(resume);
  while (history.size() < budget) {
    history.push_back(run_trial(objective, propose(history, space, seed)));
    if (on_trial) on_trial(history.back());
  }
  return summarize(std::move(history));
}

/// Uniform random search baseline with the same bookkeeping.
inline OptimizeResult random_search(const Objective& objective, const SearchSpace& space, std::size_t budget,
                                    std::uint64_t seed) {
  validate(space);
  require(budget >= 1, ErrorCode::kInvalidArgument, "budget must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Trial> history;
  for (std::size_t i = 0; i < budget; ++i) {
    std::vector<double> u(space.parameters.size());
    for (double& v : u) v = uni(rng);
    history.push_back(run_trial(objective, decode(space, u)));
  }
  return summarize(std::move(history));
}

// ---------------------------------------------------------------------------
// CSV history: trial,<params...>,objective,status

inline std::string history_csv_header(const SearchSpace& space) {
  std::string h = "trial";
  for (const auto& p : space.parameters) h += "," + p.name;
  return h + ",objective,status";
}

inline std::string trial_csv_row(const SearchSpace& space, std::size_t index, const Trial& t) {
  std::ostringstream s;
  s.precision(17);
  s << index;
  for (const auto& p : space.parameters) s << ',' << format_value(t.params.at(p.name));
  s << ',';
  if (t.ok()) s << t.objective;
  s << ',' << (t.ok() ? "ok" : "failed");
  return s.str();
}

inline std::string history_to_csv(const SearchSpace& space, const std::vector<Trial>& history) {
  std::string out = history_csv_header(space) + "\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += trial_csv_row(space, i, history[i]) + "\n";
  return out;
}

inline std::vector<Trial> history_from_csv(const SearchSpace& space, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kFormatError, "history file is empty");
  require(line == history_csv_header(space), ErrorCode::kFormatError, "history header does not match the space");
  std::vector<Trial> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    require(cells.size() == space.parameters.size() + 3, ErrorCode::kFormatError, "history row has wrong width");
    Trial t;
    try {
      for (std::size_t i = 0; i < space.parameters.size(); ++i) {
        const auto& p = space.parameters[i];
        const auto& c = cells[i + 1];
        switch (p.kind) {
          case ParamKind::kContinuous: t.params[p.name] = std::stod(c); break;
          case ParamKind::kInteger: t.params[p.name] = std::stoll(c); break;
          case ParamKind::kCategorical: t.params[p.name] = c; break;
        }
      }
      const auto& status = cells.back();
      require(status == "ok" || status == "failed", ErrorCode::kFormatError, "unknown trial status " + status);
      t.status = status == "ok" ? TrialStatus::kOk : TrialStatus::kFailed;
      if (t.ok()) t.objective = std::stod(cells[cells.size() - 2]);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormatError, "unparsable history row: " + line);
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Classifier search space used when an experiment asks for tuning.
inline SearchSpace default_classifier_space() {
  return {{ParamSpec::continuous("learning_rate", 1e-4, 1e-1, true), ParamSpec::integer("hidden1", 16, 128),
           ParamSpec::integer("hidden2", 8, 64), ParamSpec::continuous("dropout", 0.0, 0.5),
           ParamSpec::categorical("batch_size", {"8", "16", "32"})}};
}

}  // namespace voxbm::hyperopt
