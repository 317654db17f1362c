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
#ifndef HMDDP_SYSTEMS_RK4_HPP
#define HMDDP_SYSTEMS_RK4_HPP

#include "hmddp/core.hpp"

#include <concepts>
#include <memory>
#include <utility>

namespace hmddp::systems {

/// Continuous vector field xdot = F(x, u) with analytic A = dF/dx, B = dF/du.
template <class T>
concept VectorField = requires(const T& f, const Vector& x, const Vector& u, Matrix& A,
                               Matrix& B) {
  { f.state_dim() } -> std::convertible_to<int>;
  { f.control_dim() } -> std::convertible_to<int>;
  { f.derivative(x, u) } -> std::convertible_to<Vector>;
  f.jacobians(x, u, A, B);
};

/// Explicit RK4 one-step map; Jacobians chained through the four stages.
template <VectorField Field>
class Rk4Dynamics final : public DynamicsModel {
 public:
  Rk4Dynamics(Field field, double dt) : field_(std::move(field)), dt_(dt) {
    if (!(dt > 0.0)) throw ProblemError("discretize: dt must be positive");
  }

  int state_dim() const override { return field_.state_dim(); }
  int control_dim() const override { return field_.control_dim(); }
  double dt() const { return dt_; }
  const Field& field() const { return field_; }

  Vector step(const Vector& x, const Vector& u) const override {
    const double h = dt_;
    const Vector k1 = field_.derivative(x, u);
    const Vector k2 = field_.derivative(x + 0.5 * h * k1, u);
    const Vector k3 = field_.derivative(x + 0.5 * h * k2, u);
    const Vector k4 = field_.derivative(x + h * k3, u);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  void jacobians(const Vector& x, const Vector& u, Matrix& fx,
                 Matrix& fu) const override {
    const double h = dt_;
    const int n = state_dim();
    const Matrix I = Matrix::Identity(n, n);
    Matrix A1, B1, A2, B2, A3, B3, A4, B4;

    const Vector k1 = field_.derivative(x, u);
    field_.jacobians(x, u, A1, B1);
    const Vector x2 = x + 0.5 * h * k1;
    const Vector k2 = field_.derivative(x2, u);
    field_.jacobians(x2, u, A2, B2);
    const Vector x3 = x + 0.5 * h * k2;
    const Vector k3 = field_.derivative(x3, u);
    field_.jacobians(x3, u, A3, B3);
    const Vector x4 = x + h * k3;
    field_.jacobians(x4, u, A4, B4);

    const Matrix dk1x = A1;
    const Matrix dk2x = A2 * (I + 0.5 * h * dk1x);
    const Matrix dk3x = A3 * (I + 0.5 * h * dk2x);
    const Matrix dk4x = A4 * (I + h * dk3x);
    fx = I + (h / 6.0) * (dk1x + 2.0 * dk2x + 2.0 * dk3x + dk4x);

    const Matrix dk1u = B1;
    const Matrix dk2u = A2 * (0.5 * h * dk1u) + B2;
    const Matrix dk3u = A3 * (0.5 * h * dk2u) + B3;
    const Matrix dk4u = A4 * (h * dk3u) + B4;
    fu = (h / 6.0) * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
  }

 private:
  Field field_;
  double dt_;
};

template <VectorField Field>
std::shared_ptr<Rk4Dynamics<Field>> discretize(Field field, double dt) {
  return std::make_shared<Rk4Dynamics<Field>>(std::move(field), dt);
}

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_RK4_HPP
