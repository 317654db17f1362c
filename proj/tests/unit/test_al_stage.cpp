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
#include "hmddp/al_stage.hpp"
#include "hmddp/systems/linear.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hmddp;

namespace {

// x+ = x + u, |u| <= 0.5, x0 = 1, N = 2.
ProblemDefinition bounded_scalar() {
  auto f = systems::lqr_fixture(Matrix::Identity(1, 1), Matrix::Identity(1, 1), 2,
                                Vector::Ones(1));
  ProblemDefinition p = f.problem;
  ConstraintSet cons(1, 1);
  cons.add_stage(std::make_shared<BoundConstraint>(BoundConstraint::Target::Control, 0, -0.5,
                                                   0.5, 1, 1));
  p.constraints = cons;
  return p;
}

std::pair<Trajectory, ShootingStructure> zero_start(const ProblemDefinition& p) {
  return initial_rollout({p.x_init}, std::vector<Vector>(p.horizon, Vector::Zero(1)),
                         *p.dynamics, p.dt);
}

}  // namespace

TEST(AlTerms, InactiveRowsContributeNothing) {
  Vector g(2);
  g << -0.3, 0.0;
  Matrix gx = Matrix::Ones(2, 3), gu = Matrix::Ones(2, 1);
  const Vector lambda = Vector::Constant(2, 4.0);
  const AlTerms t = al_cost_terms(g, gx, gu, lambda, 10.0);
  EXPECT_EQ(t.penalty, 0.0);
  EXPECT_TRUE(t.lx.isZero());
  EXPECT_TRUE(t.luu.isZero());
}

TEST(AlTerms, ActiveRowValueAndGradientAgainstDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix Gx(3, 2), Gu(3, 1);
    for (int i = 0; i < 3; ++i) {
      Gx(i, 0) = normal(rng);
      Gx(i, 1) = normal(rng);
      Gu(i, 0) = normal(rng);
    }
    Vector c(3);
    c << normal(rng), normal(rng), normal(rng);
    const Vector lambda = Vector::Constant(3, 0.5 + trial * 0.1);
    const double mu = 1.0 + trial;
    auto penalty = [&](const Vector& z) {
      const Vector g = Gx * z.head(2) + Gu * z.tail(1) - c;
      double v = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (g(i) > 0) v += lambda(i) * g(i) + 0.5 * mu * g(i) * g(i);
      }
      return v;
    };
    Vector z(3);
    z << normal(rng), normal(rng), normal(rng);
    const Vector g = Gx * z.head(2) + Gu * z.tail(1) - c;
    if ((g.array().abs() < 1e-4).any()) continue;
    const AlTerms t = al_cost_terms(g, Gx, Gu, lambda, mu);
    EXPECT_NEAR(t.penalty, penalty(z), 1e-12 * (1.0 + penalty(z)));
    for (int i = 0; i < 3; ++i) {
      Vector zp = z, zm = z;
      zp(i) += 1e-6;
      zm(i) -= 1e-6;
      const double fd = (penalty(zp) - penalty(zm)) / 2e-6;
      const double an = i < 2 ? t.lx(i) : t.lu(0);
      EXPECT_NEAR(an, fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(AlMultipliers, ProjectedUpdateAndPenaltyGrowth) {
  ProblemDefinition p = bounded_scalar();
  AlConfig cfg;
  cfg.lambda0 = 0.2;
  cfg.mu0 = 2.0;
  cfg.phi = 3.0;
  AlState s = AlState::initial(p.constraints, 2, cfg);
  Trajectory t(2, 1, 1, 0.1);
  t.controls[0] = Vector::Constant(1, 0.8);   // g = (0.3, -1.3)
  t.controls[1] = Vector::Constant(1, -0.1);  // g = (-0.6, -0.4)
  update_multipliers(s, t, p.constraints);
  EXPECT_NEAR(s.lambda[0](0), 0.2 + 2.0 * 0.3, 1e-15);
  EXPECT_EQ(s.lambda[0](1), 0.0);
  EXPECT_EQ(s.lambda[1](0), 0.0);
  EXPECT_NEAR(s.lambda[1](1), 0.0, 0.0);
  EXPECT_DOUBLE_EQ(s.penalty(), 6.0);
  EXPECT_GE(s.lambda_min(), 0.0);
}

TEST(AlMultipliers, StayNonnegativeUnderRandomUpdates) {
  ProblemDefinition p = bounded_scalar();
  AlConfig cfg;
  AlState s = AlState::initial(p.constraints, 2, cfg);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 2.0);
  Trajectory t(2, 1, 1, 0.1);
  for (int i = 0; i < 200; ++i) {
    for (auto& u : t.controls) u(0) = normal(rng);
    const double before = s.penalty();
    update_multipliers(s, t, p.constraints);
    EXPECT_GE(s.lambda_min(), 0.0);
    EXPECT_DOUBLE_EQ(s.penalty() / before, cfg.phi);
    if (s.penalty() > 1e100) break;
  }
}

TEST(AlObjective, AddsPenaltyOnlyWhenViolated) {
  ProblemDefinition p = bounded_scalar();
  AlConfig cfg;
  cfg.lambda0 = 1.0;
  cfg.mu0 = 4.0;
  AlState s = AlState::initial(p.constraints, 2, cfg);
  AlObjective obj(*p.cost, p.constraints, s);
  const Vector x = Vector::Constant(1, 0.3);
  EXPECT_DOUBLE_EQ(obj.running(x, Vector::Constant(1, 0.2), 0),
                   p.cost->running(x, Vector::Constant(1, 0.2), 0));
  const double h = 0.25;
  EXPECT_DOUBLE_EQ(obj.running(x, Vector::Constant(1, 0.75), 0),
                   p.cost->running(x, Vector::Constant(1, 0.75), 0) + 1.0 * h + 2.0 * h * h);
}

TEST(SolveAl, ReachesCoarseTolerance) {
  ProblemDefinition p = bounded_scalar();
  auto [traj, shoot] = zero_start(p);
  AlConfig cfg;
  const auto out = solve_al(p, traj, shoot, cfg, {}, {}, {});
  EXPECT_EQ(out.result.status, SolveStatus::Converged);
  EXPECT_LE(max_violation(out.result.trajectory, p.constraints), cfg.c_max);
  ASSERT_GE(out.penalty_history.size(), 2u);
  for (std::size_t i = 1; i < out.penalty_history.size(); ++i) {
    EXPECT_DOUBLE_EQ(out.penalty_history[i] / out.penalty_history[i - 1], cfg.phi);
  }
  for (double l : out.lambda_min_history) EXPECT_GE(l, 0.0);
  for (const auto& r : out.result.iterations) EXPECT_EQ(r.stage, "al");
}

TEST(SolveAl, InnerConvergenceFlagDemandsStopTest) {
  ProblemDefinition p = bounded_scalar();
  auto [traj, shoot] = zero_start(p);
  AlConfig loose;
  loose.c_max = 1.0;
  const auto quick = solve_al(p, traj, shoot, loose, {}, {}, {});
  AlConfig strict = loose;
  strict.require_inner_convergence = true;
  const auto full = solve_al(p, traj, shoot, strict, {}, {}, {});
  EXPECT_EQ(quick.result.status, SolveStatus::Converged);
  EXPECT_EQ(full.result.status, SolveStatus::Converged);
  EXPECT_EQ(quick.result.iterations.size(), 1u);
  EXPECT_GT(full.result.iterations.size(), quick.result.iterations.size());
  EXPECT_TRUE(full.result.iterations.back().converged);
}

TEST(SolveAl, UnconstrainedFallsBackToMddp) {
  auto f = systems::lqr_fixture(3, 1, 20, 4u);
  auto [traj, shoot] = initial_rollout({f.problem.x_init},
                                       std::vector<Vector>(20, Vector::Zero(1)),
                                       *f.problem.dynamics, f.problem.dt);
  const auto out = solve_al(f.problem, traj, shoot, {}, {}, {}, {});
  EXPECT_EQ(out.result.status, SolveStatus::Converged);
  EXPECT_TRUE(out.penalty_history.empty());
}
