/*
 * Copyright 2026 The hmddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "hmddp/globalization.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace hmddp;

TEST(ExpectedReduction, MatchesModelFormula) {
  EXPECT_DOUBLE_EQ(expected_reduction(1.0, -2.0, 1.0, 0.0, 0.0), -1.5);
  EXPECT_DOUBLE_EQ(expected_reduction(0.5, -2.0, 1.0, 0.0, 0.0), -1.0 + 0.125);
  // Defect term is independent of alpha.
  EXPECT_DOUBLE_EQ(expected_reduction(0.25, 0.0, 0.0, 3.0, 2.0), 6.0);
  std::vector<Vector> d = {Vector::Constant(2, 1.0), Vector::Constant(1, 2.0)};
  EXPECT_DOUBLE_EQ(expected_reduction(1.0, 0.0, 0.0, d, 0.5), 0.5 * (2.0 + 4.0));
}

TEST(ReductionRatio, NegligibleModelIsConvergence) {
  EXPECT_FALSE(reduction_ratio(1.0, 2.0, 1e-17).has_value());
  const auto r = reduction_ratio(1.0, 2.0, -2.0);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(*r, 0.5);
}

TEST(Regularization, BumpLawFromZero) {
  RegState reg;
  reg.mu = 0.0;
  reg.mu0 = 1e-6;
  reg.sigma = 10.0;
  reg.mu_max = 1e-3;
  ASSERT_TRUE(bump_regularization(reg));
  EXPECT_DOUBLE_EQ(reg.mu, 1e-5);
  ASSERT_TRUE(bump_regularization(reg));
  EXPECT_DOUBLE_EQ(reg.mu, 1e-4);
  ASSERT_TRUE(bump_regularization(reg));
  EXPECT_DOUBLE_EQ(reg.mu, 1e-3);
  EXPECT_FALSE(bump_regularization(reg));
  EXPECT_DOUBLE_EQ(reg.mu, 1e-3);
}

TEST(Regularization, DecaySnapsToZeroBelowFloor) {
  RegState reg;
  reg.mu0 = 1e-6;
  reg.sigma = 10.0;
  reg.mu = 1e-5;
  decay_regularization(reg);
  EXPECT_DOUBLE_EQ(reg.mu, 1e-6);
  decay_regularization(reg);
  EXPECT_EQ(reg.mu, 0.0);
  decay_regularization(reg);
  EXPECT_EQ(reg.mu, 0.0);
}

TEST(Regularization, BumpIsMonotoneAndCapped) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logu(-9.0, 3.0), sig(1.5, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    RegState reg;
    reg.mu0 = std::pow(10.0, logu(rng));
    reg.sigma = sig(rng);
    reg.mu_max = reg.mu0 * std::pow(10.0, 6.0 * (trial % 5) / 4.0 + 0.5);
    reg.mu = 0.0;
    double previous = reg.mu;
    while (bump_regularization(reg)) {
      EXPECT_GT(reg.mu, previous);
      EXPECT_LE(reg.mu, reg.mu_max);
      previous = reg.mu;
    }
    EXPECT_EQ(reg.mu, reg.mu_max);
  }
}

TEST(LineSearchConfig, HalvingSchedule) {
  LineSearchConfig cfg;
  const auto a = cfg.schedule();
  ASSERT_EQ(a.size(), 11u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], std::ldexp(1.0, -int(i)));
  EXPECT_TRUE(cfg.accepts(cfg.r_lo));
  EXPECT_TRUE(cfg.accepts(cfg.r_hi));
  EXPECT_FALSE(cfg.accepts(cfg.r_lo * 0.5));
  cfg.r_lo = 2.0;
  cfg.r_hi = 1.0;
  EXPECT_THROW(cfg.validate(), ProblemError);
}

TEST(LineSearch, ExactModelAcceptsFullStep) {
  LineSearchConfig cfg;
  cfg.defect_weight = 0.0;
  const double dV1 = -4.0, dV2 = 2.0, merit = 10.0;
  int calls = 0;
  auto trial = [&](double a) -> std::optional<double> {
    ++calls;
    return merit + a * dV1 + 0.5 * a * a * dV2;
  };
  const auto out = line_search(cfg, dV1, dV2, 0.0, merit, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Accepted);
  EXPECT_DOUBLE_EQ(out.alpha, 1.0);
  EXPECT_DOUBLE_EQ(out.ratio, 1.0);
  EXPECT_EQ(calls, 1);
}

TEST(LineSearch, BacktracksUntilRatioInWindow) {
  LineSearchConfig cfg;
  cfg.defect_weight = 0.0;
  // Merit rises for alpha > 0.3, follows the model below.
  auto trial = [&](double a) -> std::optional<double> {
    if (a > 0.3) return 100.0;
    return 10.0 - a;
  };
  const auto out = line_search(cfg, -1.0, 0.0, 0.0, 10.0, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Accepted);
  EXPECT_DOUBLE_EQ(out.alpha, 0.25);
  EXPECT_EQ(out.trials, 3);
}

TEST(LineSearch, DivergentTrialsAreRejected) {
  LineSearchConfig cfg;
  auto trial = [&](double a) -> std::optional<double> {
    if (a > 0.6) return std::nullopt;
    if (a > 0.3) return std::nan("");
    return 5.0 - a;
  };
  const auto out = line_search(cfg, -1.0, 0.0, 0.0, 5.0, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Accepted);
  EXPECT_DOUBLE_EQ(out.alpha, 0.25);
}

TEST(LineSearch, FailureTriesWholeSchedule) {
  LineSearchConfig cfg;
  auto trial = [&](double) -> std::optional<double> { return 100.0; };
  const auto out = line_search(cfg, -1.0, 0.0, 0.0, 5.0, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Failed);
  EXPECT_EQ(out.trials, cfg.trials);
}

TEST(LineSearch, NegligibleModelSignalsConvergence) {
  LineSearchConfig cfg;
  int calls = 0;
  auto trial = [&](double) -> std::optional<double> {
    ++calls;
    return 0.0;
  };
  const auto out = line_search(cfg, 0.0, 0.0, 0.0, 5.0, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Converged);
  EXPECT_EQ(calls, 0);
}

TEST(LineSearch, DefectTermEntersTheModel) {
  LineSearchConfig cfg;
  cfg.defect_weight = 10.0;
  // dV = -1 + 10*0.05 = -0.5; actual change -0.5 gives r = 1.
  auto trial = [&](double) -> std::optional<double> { return 4.5; };
  const auto out = line_search(cfg, -1.0, 0.0, 0.05, 5.0, trial);
  EXPECT_EQ(out.kind, LineSearchOutcome::Kind::Accepted);
  EXPECT_DOUBLE_EQ(out.expected, -0.5);
  EXPECT_DOUBLE_EQ(out.ratio, 1.0);
}
