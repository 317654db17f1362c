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
#ifndef HMDDP_SYSTEMS_QUADROTOR_HPP
#define HMDDP_SYSTEMS_QUADROTOR_HPP

#include "hmddp/core.hpp"
#include "hmddp/systems/car2d.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace hmddp::systems {

struct PlanarQuadrotorParams {
  double mass = 0.5;        // kg
  double inertia = 0.01;    // kg m^2
  double arm_length = 0.25; // m
  double gravity = 9.81;
  double thrust_min = 0.1;  // N, per rotor
  double tilt_max = std::numbers::pi / 6.0;
  std::vector<Circle> obstacles;
};

/// State (x, y, theta, xdot, ydot, thetadot), control (u_L, u_R).
class PlanarQuadrotor {
 public:
  explicit PlanarQuadrotor(PlanarQuadrotorParams p = {}) : p_(std::move(p)) {}

  int state_dim() const { return 6; }
  int control_dim() const { return 2; }
  const PlanarQuadrotorParams& params() const { return p_; }

  double hover_thrust() const { return 0.5 * p_.mass * p_.gravity; }

  Vector derivative(const Vector& x, const Vector& u) const {
    const double T = u(0) + u(1);
    Vector dx(6);
    dx(0) = x(3);
    dx(1) = x(4);
    dx(2) = x(5);
    dx(3) = -T * std::sin(x(2)) / p_.mass;
    dx(4) = T * std::cos(x(2)) / p_.mass - p_.gravity;
    dx(5) = p_.arm_length * (u(1) - u(0)) / p_.inertia;
    return dx;
  }

  void jacobians(const Vector& x, const Vector& u, Matrix& A, Matrix& B) const {
    const double T = u(0) + u(1);
    const double s = std::sin(x(2)), c = std::cos(x(2));
    A.setZero(6, 6);
    A(0, 3) = 1.0;
    A(1, 4) = 1.0;
    A(2, 5) = 1.0;
    A(3, 2) = -T * c / p_.mass;
    A(4, 2) = -T * s / p_.mass;
    B.setZero(6, 2);
    B(3, 0) = B(3, 1) = -s / p_.mass;
    B(4, 0) = B(4, 1) = c / p_.mass;
    B(5, 0) = -p_.arm_length / p_.inertia;
    B(5, 1) = p_.arm_length / p_.inertia;
  }

  /// |theta| <= tilt_max, u_L, u_R >= thrust_min, plus obstacle circles.
  ConstraintSet constraints() const {
    ConstraintSet set(6, 2);
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::State, 2, -p_.tilt_max, p_.tilt_max, 6, 2));
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::Control, 0, p_.thrust_min, BoundConstraint::kNone, 6, 2));
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::Control, 1, p_.thrust_min, BoundConstraint::kNone, 6, 2));
    for (const auto& o : p_.obstacles) {
      set.add_stage(std::make_shared<CircleObstacle>(o.cx, o.cy, o.radius, 0, 1, 6, 2));
    }
    return set;
  }

 private:
  PlanarQuadrotorParams p_;
};

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_QUADROTOR_HPP
