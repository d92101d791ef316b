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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <random>
#include <stdexcept>
#include <vector>

#include "support/oracles.hpp"
#include "voxbm/hyperopt/bayes.hpp"

namespace ho = voxbm::hyperopt;
using voxbm::ErrorCode;

namespace {

template <typename Fn>
ErrorCode error_of(Fn&& fn) {
  try {
    fn();
  } catch (const voxbm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

ho::SearchSpace branin_space() {
  return {{ho::ParamSpec::continuous("x1", -5.0, 10.0), ho::ParamSpec::continuous("x2", 0.0, 15.0)}};
}

double branin_objective(const ho::Params& p) {
  return voxbm::testing::branin(ho::as_double(p.at("x1")), ho::as_double(p.at("x2")));
}

bool within(const ho::SearchSpace& s, const ho::Params& p) {
  for (const auto& spec : s.parameters) {
    const auto& v = p.at(spec.name);
    if (spec.kind == ho::ParamKind::kCategorical) {
      if (std::find(spec.choices.begin(), spec.choices.end(), std::get<std::string>(v)) == spec.choices.end()) {
        return false;
      }
    } else if (ho::as_double(v) < spec.lo || ho::as_double(v) > spec.hi) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(ExpectedImprovement, ClosedFormValue) {
  // Oracle written out: 0.5 * (Phi(1) + phi(1)).
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf1 = 0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)));
  EXPECT_NEAR(ho::expected_improvement(0.5, 0.5, 1.0), 0.5 * (cdf1 + phi1), 1e-12);
  EXPECT_NEAR(ho::expected_improvement(0.5, 0.5, 1.0), 0.5417, 1e-4);
}

TEST(ExpectedImprovement, ZeroWithoutUncertaintyAtOrAboveBest) {
  EXPECT_EQ(ho::expected_improvement(1.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(ho::expected_improvement(2.0, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(ho::expected_improvement(0.25, 0.0, 1.0), 0.75);
}

TEST(ExpectedImprovement, NonNegativeEverywhere) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 2000; ++i) EXPECT_GE(ho::expected_improvement(u(rng), std::abs(u(rng)), u(rng)), 0.0);
}

TEST(UnitCube, RoundTripsEveryKind) {
  const auto space = ho::default_classifier_space();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> c(space.parameters.size());
    for (double& v : c) v = u(rng);
    const auto p = ho::decode(space, c);
    ASSERT_TRUE(within(space, p));
    const auto back = ho::decode(space, ho::unit_coordinates(space, p));
    for (const auto& spec : space.parameters) {
      if (spec.kind == ho::ParamKind::kContinuous) {
        EXPECT_NEAR(ho::as_double(back.at(spec.name)), ho::as_double(p.at(spec.name)),
                    1e-12 * std::max(1.0, std::abs(ho::as_double(p.at(spec.name)))));
      } else {
        EXPECT_EQ(back.at(spec.name), p.at(spec.name));
      }
    }
  }
}

TEST(UnitCube, IntegerAndCategoricalCoverEveryValue) {
  const auto spec = ho::ParamSpec::integer("k", 3, 6);
  std::set<long long> seen;
  for (int i = 0; i <= 100; ++i) seen.insert(std::get<long long>(ho::from_unit(spec, i / 100.0)));
  EXPECT_EQ(seen, (std::set<long long>{3, 4, 5, 6}));
  const auto cat = ho::ParamSpec::categorical("c", {"a", "b", "c"});
  EXPECT_EQ(std::get<std::string>(ho::from_unit(cat, 0.5)), "b");
  const ho::SearchSpace s{{cat}};
  const auto x = ho::encode(s, {{"c", std::string("b")}});
  EXPECT_EQ(x, (Eigen::Vector3d(0, 1, 0)));
  EXPECT_NEAR(std::exp(std::log(1e-4) + 0.5 * (std::log(1e-1) - std::log(1e-4))),
              ho::as_double(ho::from_unit(ho::ParamSpec::continuous("lr", 1e-4, 1e-1, true), 0.5)), 1e-15);
}

TEST(SearchSpaceValidation, BadSpacesAreRejected) {
  EXPECT_EQ(error_of([] { ho::propose({}, ho::SearchSpace{}, 1); }), ErrorCode::kBadSpace);
  EXPECT_EQ(error_of([] { ho::propose({}, {{ho::ParamSpec::continuous("x", 1.0, 1.0)}}, 1); }), ErrorCode::kBadSpace);
  EXPECT_EQ(error_of([] { ho::propose({}, {{ho::ParamSpec::continuous("x", 0.0, 1.0, true)}}, 1); }),
            ErrorCode::kBadSpace);
  EXPECT_EQ(error_of([] { ho::propose({}, {{ho::ParamSpec::categorical("c", {})}}, 1); }), ErrorCode::kBadSpace);
}

TEST(Propose, EmptyHistoryStaysInBounds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_TRUE(within(ho::default_classifier_space(), ho::propose({}, ho::default_classifier_space(), seed)));
    EXPECT_TRUE(within(branin_space(), ho::propose({}, branin_space(), seed)));
  }
}

TEST(Propose, InitialDesignIsSpaceFilling) {
  // Five shifted Halton points in 2-D never share a fifth of either axis twice.
  const auto space = branin_space();
  std::vector<ho::Trial> history;
  std::set<int> bins_x;
  for (int i = 0; i < 5; ++i) {
    const auto p = ho::propose(history, space, 42);
    bins_x.insert(static_cast<int>(ho::to_unit(space.parameters[0], p.at("x1")) * 4.0));
    history.push_back({p, 1.0});
  }
  EXPECT_GE(bins_x.size(), 3u);
}

TEST(GaussianProcess, InterpolatesObservations) {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> y;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    Eigen::VectorXd p(2);
    p << u(rng), u(rng);
    x.push_back(p);
    y.push_back(std::sin(6.0 * p(0)) + p(1) * p(1) * 3.0);
  }
  const ho::GaussianProcess gp(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [mu, sigma] = gp.predict(x[i]);
    EXPECT_NEAR(mu, y[i], 1e-3);
    EXPECT_LT(sigma, 1e-2);
  }
}

TEST(GaussianProcess, LengthScaleMaximizesLikelihoodOverGrid) {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd p(1);
    p << i / 9.0;
    x.push_back(p);
    y.push_back(std::sin(3.0 * p(0)));
  }
  ho::GaussianProcess gp(x, y);
  const double chosen = gp.length_scale();
  const double ll = gp.log_marginal_likelihood(chosen);
  for (double l : ho::length_scale_grid()) EXPECT_LE(gp.log_marginal_likelihood(l), ll + 1e-9);
}

TEST(Optimize, BudgetOneReturnsTheSeededDraw) {
  const auto r = ho::optimize(branin_objective, branin_space(), 1, 17);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.best.params, ho::propose({}, branin_space(), 17));
}

TEST(Optimize, BestSoFarNeverIncreasesAndRunIsReproducible) {
  const auto a = ho::optimize(branin_objective, branin_space(), 15, 3);
  const auto b = ho::optimize(branin_objective, branin_space(), 15, 3);
  for (std::size_t i = 1; i < a.best_so_far.size(); ++i) EXPECT_LE(a.best_so_far[i], a.best_so_far[i - 1]);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].params, b.history[i].params);
    EXPECT_EQ(a.history[i].objective, b.history[i].objective);
  }
}

TEST(Optimize, BraninReachesGlobalMinimumNeighbourhood) {
  const double reference = voxbm::testing::branin_grid_minimum(3000);
  EXPECT_NEAR(reference, 0.397887, 1e-4);
  int hits = 0;
  double bo_mean = 0.0;
  double random_mean = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double best = ho::optimize(branin_objective, branin_space(), 50, seed).best.objective;
    hits += best <= reference + 0.5 ? 1 : 0;
    bo_mean += best / 5.0;
    random_mean += ho::random_search(branin_objective, branin_space(), 50, seed).best.objective / 5.0;
  }
  EXPECT_GE(hits, 4);
  EXPECT_LT(bo_mean, random_mean);
}

TEST(Optimize, FailedTrialsAreRecordedAndSkipped) {
  int calls = 0;
  const auto flaky = [&](const ho::Params& p) {
    if (++calls % 3 == 0) throw std::runtime_error("diverged");
    return branin_objective(p);
  };
  const auto r = ho::optimize(flaky, branin_space(), 12, 4);
  int failed = 0;
  for (const auto& t : r.history) failed += t.ok() ? 0 : 1;
  EXPECT_EQ(failed, 4);
  EXPECT_TRUE(r.best.ok());
  const auto nan_objective = [](const ho::Params&) { return std::nan(""); };
  EXPECT_EQ(error_of([&] { ho::optimize(nan_objective, branin_space(), 3, 1); }), ErrorCode::kNoSuccessfulTrial);
}

TEST(History, CsvRoundTripAndResume) {
  const auto space = ho::default_classifier_space();
  const auto objective = [](const ho::Params& p) {
    return std::abs(std::log10(ho::as_double(p.at("learning_rate"))) + 2.0) + ho::as_double(p.at("dropout"));
  };
  const auto full = ho::optimize(objective, space, 8, 6);
  const auto first = ho::optimize(objective, space, 4, 6);
  const auto parsed = ho::history_from_csv(space, ho::history_to_csv(space, first.history));
  ASSERT_EQ(parsed.size(), 4u);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(parsed[i].params, first.history[i].params);
    EXPECT_EQ(parsed[i].objective, first.history[i].objective);
  }
  const auto resumed = ho::optimize(objective, space, 8, 6, parsed);
  for (std::size_t i = 0; i < full.history.size(); ++i) EXPECT_EQ(resumed.history[i].params, full.history[i].params);
  EXPECT_EQ(error_of([&] { ho::history_from_csv(space, "trial,x,objective,status\n"); }), ErrorCode::kFormatError);
}
