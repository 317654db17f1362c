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
#include "hmddp/systems/benchmarks.hpp"
#include "hmddp/systems/derivative_check.hpp"
#include "hmddp/systems/linear.hpp"
#include "hmddp/systems/rk4.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hmddp;
using namespace hmddp::systems;

namespace {

struct Still {
  int state_dim() const { return 3; }
  int control_dim() const { return 1; }
  Vector derivative(const Vector& x, const Vector&) const { return Vector::Zero(x.size()); }
  void jacobians(const Vector&, const Vector&, Matrix& A, Matrix& B) const {
    A.setZero(3, 3);
    B.setZero(3, 1);
  }
};

struct Integrator {
  int state_dim() const { return 1; }
  int control_dim() const { return 1; }
  Vector derivative(const Vector&, const Vector& u) const { return u; }
  void jacobians(const Vector&, const Vector&, Matrix& A, Matrix& B) const {
    A.setZero(1, 1);
    B.setOnes(1, 1);
  }
};

struct LinearField {
  Matrix A, B;
  int state_dim() const { return static_cast<int>(A.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
  Vector derivative(const Vector& x, const Vector& u) const { return A * x + B * u; }
  void jacobians(const Vector&, const Vector&, Matrix& a, Matrix& b) const {
    a = A;
    b = B;
  }
};

// Truncated exponential series, summed until terms vanish.
Matrix expm_series(const Matrix& M, int terms) {
  Matrix sum = Matrix::Identity(M.rows(), M.cols()), term = sum;
  for (int k = 1; k < terms; ++k) {
    term = term * M / k;
    sum += term;
  }
  return sum;
}

double cartpole_energy(const CartPoleParams& p, const Vector& x) {
  const double v = x(2), w = x(3), th = x(1), l = p.pole_length;
  const double vx = v + l * w * std::cos(th), vy = l * w * std::sin(th);
  return 0.5 * p.cart_mass * v * v + 0.5 * p.pole_mass * (vx * vx + vy * vy) -
         p.pole_mass * p.gravity * l * std::cos(th);
}

}  // namespace

TEST(Rk4, ZeroFieldIsIdentity) {
  auto dyn = discretize(Still{}, 0.05);
  Vector x(3);
  x << 1.0, -2.0, 3.5;
  EXPECT_EQ(dyn->step(x, Vector::Zero(1)), x);
  Matrix fx, fu;
  dyn->jacobians(x, Vector::Zero(1), fx, fu);
  EXPECT_TRUE(fx.isIdentity(0.0));
}

TEST(Rk4, ConstantFieldIsExact) {
  auto dyn = discretize(Integrator{}, 0.01);
  EXPECT_DOUBLE_EQ(dyn->step(Vector::Constant(1, 2.0), Vector::Ones(1))(0), 2.01);
  EXPECT_THROW(discretize(Integrator{}, 0.0), ProblemError);
}

TEST(Rk4, LinearJacobianMatchesExponentialSeries) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    LinearField f{Matrix(4, 4), Matrix(4, 2)};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) f.A(i, j) = normal(rng);
      f.B(i, 0) = normal(rng);
      f.B(i, 1) = normal(rng);
    }
    const double dt = 1e-3;
    auto dyn = discretize(f, dt);
    Matrix fx, fu;
    dyn->jacobians(Vector::Zero(4), Vector::Zero(2), fx, fu);
    // RK4 of a linear field is the 4th-order Taylor polynomial exactly.
    EXPECT_LE((fx - expm_series(f.A * dt, 5)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((fx - expm_series(f.A * dt, 30)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(CartPole, EnergyConservedWithoutForce) {
  CartPoleParams p;
  auto dyn = discretize(CartPole(p), 0.01);
  Vector x(4);
  x << 0.0, 1.0, 0.0, 0.0;
  const double E0 = cartpole_energy(p, x);
  for (int k = 0; k < 300; ++k) x = dyn->step(x, Vector::Zero(1));
  EXPECT_LT(std::abs(cartpole_energy(p, x) - E0) / std::abs(E0), 1e-6);
}

TEST(CartPole, FourAffineConstraintRows) {
  auto b = cartpole_benchmark();
  EXPECT_EQ(b.problem.constraints.stage_dim(), 4);
  Vector x = Vector::Zero(4);
  x(0) = 0.9;
  const Vector g = b.problem.constraints.evaluate(x, Vector::Constant(1, -6.0), 0);
  EXPECT_NEAR(g.maxCoeff(), 1.0, 1e-15);
  EXPECT_EQ(b.problem.horizon, 300);
  EXPECT_EQ(b.problem.segments, 10);
}

TEST(PlanarCar, NoLateralBodyVelocity) {
  PlanarCar car(car2d_params());
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Vector x(4);
    x << u(rng), u(rng), u(rng), u(rng);
    const Vector dx = car.derivative(x, Vector::Zero(2));
    EXPECT_NEAR(-dx(0) * std::sin(x(2)) + dx(1) * std::cos(x(2)), 0.0, 1e-14);
  }
}

TEST(PlanarCar, ConstraintLayout) {
  auto b = car2d_benchmark();
  // Two rows per actuator bound plus one per obstacle.
  EXPECT_EQ(b.problem.constraints.stage_dim(), 4 + 2);
  EXPECT_EQ(b.problem.horizon, 500);
  EXPECT_EQ(b.problem.segments, 5);
}

TEST(PlanarQuadrotor, HoverIsFixedPoint) {
  PlanarQuadrotor q(quadrotor_params());
  auto dyn = discretize(q, 0.01);
  Vector x = Vector::Zero(6);
  x(0) = 1.3;
  x(1) = -0.4;
  const Vector u = Vector::Constant(2, q.hover_thrust());
  EXPECT_LE((dyn->step(x, u) - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(q.hover_thrust(), 0.5 * 0.5 * 9.81);
}

TEST(PlanarQuadrotor, ConstraintLayout) {
  auto b = quadrotor_benchmark();
  // Tilt (two rows), two thrust floors, one obstacle.
  EXPECT_EQ(b.problem.constraints.stage_dim(), 5);
  Vector x = Vector::Zero(6);
  x(2) = std::numbers::pi / 6.0 + 0.1;
  EXPECT_NEAR(b.problem.constraints.evaluate(x, Vector::Ones(2), 0)(0), 0.1, 1e-15);
}

TEST(DerivativeCheck, AllBenchmarksPass) {
  for (const auto& b : {cartpole_benchmark(), car2d_benchmark(), quadrotor_benchmark()}) {
    EXPECT_TRUE(all_pass(check_derivatives(*b.problem.dynamics, b.box, 100, 1))) << b.name;
    EXPECT_TRUE(all_pass(check_derivatives(*b.problem.cost, b.box, 100, 2))) << b.name;
    EXPECT_TRUE(all_pass(check_derivatives(b.problem.constraints, b.box, 100, 3))) << b.name;
  }
}

TEST(DerivativeCheck, AffineRowsAreExact) {
  auto b = cartpole_benchmark();
  const auto reps = check_derivatives(b.problem.constraints, b.box, 50, 9);
  EXPECT_LE(reps[0].max_error, 1e-9);
  EXPECT_LE(reps[1].max_error, 1e-9);
}

TEST(DerivativeCheck, CorruptedEntryIsFlagged) {
  Matrix A(2, 2), B(2, 1);
  A << 1.0, 0.1, 0.0, 1.0;
  B << 0.0, 0.1;
  Matrix bad = A;
  bad(1, 0) += 0.1;
  LinearDynamics dyn(A, B, bad, B);
  SampleBox box{Vector::Constant(2, -1), Vector::Constant(2, 1), Vector::Constant(1, -1),
                Vector::Constant(1, 1)};
  const auto reps = check_derivatives(dyn, box, 20, 0);
  EXPECT_FALSE(reps[0].pass());
  EXPECT_NEAR(reps[0].max_error, 0.1, 1e-8);
  EXPECT_NE(reps[0].worst.find("entry (1,0)"), std::string::npos);
  EXPECT_TRUE(reps[1].pass());
}

TEST(LqrFixture, ScalarGainSign) {
  const double dt = 0.01;
  auto f = lqr_fixture(Matrix::Identity(1, 1), Matrix::Constant(1, 1, dt), 20, Vector::Ones(1));
  for (const auto& K : f.oracle.gains) {
    EXPECT_TRUE(std::isfinite(K(0, 0)));
    EXPECT_LT(K(0, 0), 0.0);
  }
}

TEST(LqrFixture, NoStateCostGivesZeroGains) {
  auto f = lqr_fixture(Matrix::Identity(2, 2), Matrix::Ones(2, 1), 10, Vector::Ones(2), 0.0,
                       0.1, 0.0);
  for (const auto& K : f.oracle.gains) EXPECT_TRUE(K.isZero(0.0));
  EXPECT_EQ(f.oracle.optimal_cost, 0.0);
}

TEST(LqrFixture, SpectralRadiusIsBounded) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    auto f = lqr_fixture(5, 2, 10, seed);
    const double rho = Eigen::EigenSolver<Matrix>(f.A, false).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_LE(rho, 1.2 + 1e-12);
  }
}
