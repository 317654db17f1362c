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
#ifndef HMDDP_SYSTEMS_CAR2D_HPP
#define HMDDP_SYSTEMS_CAR2D_HPP

#include "hmddp/core.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <vector>

namespace hmddp::systems {

struct Circle {
  double cx = 0.0, cy = 0.0, radius = 1.0;
};

struct PlanarCarParams {
  double omega_max = 2.0;  // rad/s
  double accel_max = 2.0;  // m/s^2
  std::vector<Circle> obstacles;
};

/// Unit point mass with heading and speed: (x, y, theta, v), control (omega, a).
class PlanarCar {
 public:
  explicit PlanarCar(PlanarCarParams p = {}) : p_(std::move(p)) {}

  int state_dim() const { return 4; }
  int control_dim() const { return 2; }
  const PlanarCarParams& params() const { return p_; }

  Vector derivative(const Vector& x, const Vector& u) const {
    Vector dx(4);
    dx << x(3) * std::cos(x(2)), x(3) * std::sin(x(2)), u(0), u(1);
    return dx;
  }

  void jacobians(const Vector& x, const Vector&, Matrix& A, Matrix& B) const {
    const double c = std::cos(x(2)), s = std::sin(x(2));
    A.setZero(4, 4);
    A(0, 2) = -x(3) * s;
    A(0, 3) = c;
    A(1, 2) = x(3) * c;
    A(1, 3) = s;
    B.setZero(4, 2);
    B(2, 0) = 1.0;
    B(3, 1) = 1.0;
  }

  ConstraintSet constraints() const {
    ConstraintSet set(4, 2);
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::Control, 0, -p_.omega_max, p_.omega_max, 4, 2));
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::Control, 1, -p_.accel_max, p_.accel_max, 4, 2));
    for (const auto& o : p_.obstacles) {
      set.add_stage(std::make_shared<CircleObstacle>(o.cx, o.cy, o.radius, 0, 1, 4, 2));
    }
    return set;
  }

 private:
  PlanarCarParams p_;
};

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_CAR2D_HPP
