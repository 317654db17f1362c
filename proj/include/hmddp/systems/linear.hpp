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
#ifndef HMDDP_SYSTEMS_LINEAR_HPP
#define HMDDP_SYSTEMS_LINEAR_HPP

#include "hmddp/core.hpp"

#include <Eigen/Eigenvalues>

#include <memory>
#include <random>
#include <vector>

namespace hmddp::systems {

/**
 * x+ = A x + B u. The reported Jacobians default to (A, B) but may be
 * declared separately, which is how a manifest can ship an inconsistent
 * model for the derivative checker to catch.
 */
class LinearDynamics final : public DynamicsModel {
 public:
  LinearDynamics(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
    jac_A_ = A_;
    jac_B_ = B_;
    check();
  }
  LinearDynamics(Matrix A, Matrix B, Matrix declared_A, Matrix declared_B)
      : A_(std::move(A)), B_(std::move(B)), jac_A_(std::move(declared_A)),
        jac_B_(std::move(declared_B)) {
    check();
  }

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int control_dim() const override { return static_cast<int>(B_.cols()); }
  Vector step(const Vector& x, const Vector& u) const override { return A_ * x + B_ * u; }
  void jacobians(const Vector&, const Vector&, Matrix& fx, Matrix& fu) const override {
    fx = jac_A_;
    fu = jac_B_;
  }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }

 private:
  void check() const {
    if (A_.rows() != A_.cols() || B_.rows() != A_.rows() ||
        jac_A_.rows() != A_.rows() || jac_A_.cols() != A_.cols() ||
        jac_B_.rows() != B_.rows() || jac_B_.cols() != B_.cols()) {
      throw ProblemError("LinearDynamics: inconsistent matrix shapes");
    }
  }
  Matrix A_, B_, jac_A_, jac_B_;
};

/// Gains and cost-to-go of the finite-horizon discrete Riccati recursion.
struct RiccatiSolution {
  std::vector<Matrix> gains;   // u_k = K_k x_k
  std::vector<Matrix> P;       // cost-to-go x^T P_k x
  double optimal_cost = 0.0;
};

/**
 * Backward Riccati recursion for sum x^T Q x + u^T R u + x_N^T Qf x_N,
 * written in cost-to-go form (independent of the DDP recursion).
 */
inline RiccatiSolution riccati(const Matrix& A, const Matrix& B, const Matrix& Q,
                               const Matrix& R, const Matrix& Qf, int horizon,
                               const Vector& x0) {
  RiccatiSolution s;
  s.gains.resize(horizon);
  s.P.resize(horizon + 1);
  s.P[horizon] = Qf;
  for (int k = horizon - 1; k >= 0; --k) {
    const Matrix& P = s.P[k + 1];
    const Matrix S = R + B.transpose() * P * B;
    const Matrix K = -S.ldlt().solve(B.transpose() * P * A);
    s.gains[k] = K;
    const Matrix Acl = A + B * K;
    Matrix Pk = Q + K.transpose() * R * K + Acl.transpose() * P * Acl;
    s.P[k] = 0.5 * (Pk + Pk.transpose());
  }
  s.optimal_cost = x0.dot(s.P[0] * x0);
  return s;
}

struct LqrFixture {
  ProblemDefinition problem;
  Matrix A, B, Q, R, Qf;
  RiccatiSolution oracle;
};

inline LqrFixture lqr_fixture(Matrix A, Matrix B, int horizon, Vector x0,
                              double q = 1.0, double r = 0.1, double qf = 50.0,
                              double dt = 0.01) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  LqrFixture f;
  f.A = std::move(A);
  f.B = std::move(B);
  f.Q = q * Matrix::Identity(n, n);
  f.R = r * Matrix::Identity(m, m);
  f.Qf = qf * Matrix::Identity(n, n);
  f.problem.dynamics = std::make_shared<LinearDynamics>(f.A, f.B);
  f.problem.cost = std::make_shared<QuadraticCost>(f.Q, f.R, f.Qf, Vector::Zero(n));
  f.problem.constraints = ConstraintSet(n, m);
  f.problem.x_init = x0;
  f.problem.x_goal = Vector::Zero(n);
  f.problem.horizon = horizon;
  f.problem.dt = dt;
  f.problem.segments = 1;
  f.oracle = riccati(f.A, f.B, f.Q, f.R, f.Qf, horizon, x0);
  return f;
}

/// Random (A, B) with spectral radius rescaled to at most 1.2.
inline LqrFixture lqr_fixture(int n, int m, int horizon, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix A(n, n), B(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = normal(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) B(i, j) = normal(rng);
  const double rho = Eigen::EigenSolver<Matrix>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 1.2) A *= 1.2 / rho;
  Vector x0(n);
  for (int i = 0; i < n; ++i) x0(i) = normal(rng);
  return lqr_fixture(std::move(A), std::move(B), horizon, std::move(x0));
}

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_LINEAR_HPP
