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
#ifndef HMDDP_SYSTEMS_CARTPOLE_HPP
#define HMDDP_SYSTEMS_CARTPOLE_HPP

#include "hmddp/core.hpp"

#include <cmath>
#include <memory>

namespace hmddp::systems {

struct CartPoleParams {
  double cart_mass = 1.0;   // kg
  double pole_mass = 0.3;   // kg, point mass at the pole tip
  double pole_length = 0.5; // m
  double gravity = 9.81;
  double force_max = 5.0;         // |F| <= force_max [N]
  double rail_half_length = 0.8;  // |p| <= rail_half_length [m]
};

/**
 * Frictionless cart-pole, state (p, theta, pdot, thetadot), theta = 0 hanging
 * down, control = horizontal force on the cart.
 */
class CartPole {
 public:
  explicit CartPole(CartPoleParams p = {}) : p_(p) {}

  int state_dim() const { return 4; }
  int control_dim() const { return 1; }
  const CartPoleParams& params() const { return p_; }

  Vector derivative(const Vector& x, const Vector& u) const {
    const double m1 = p_.cart_mass, m2 = p_.pole_mass, l = p_.pole_length,
                 g = p_.gravity;
    const double th = x(1), w = x(3), F = u(0);
    const double s = std::sin(th), c = std::cos(th);
    const double D = m1 + m2 * s * s;
    Vector dx(4);
    dx(0) = x(2);
    dx(1) = w;
    dx(2) = (l * m2 * s * w * w + F + m2 * g * c * s) / D;
    dx(3) = -(l * m2 * c * s * w * w + F * c + (m1 + m2) * g * s) / (l * D);
    return dx;
  }

  void jacobians(const Vector& x, const Vector& u, Matrix& A, Matrix& B) const {
    const double m1 = p_.cart_mass, m2 = p_.pole_mass, l = p_.pole_length,
                 g = p_.gravity;
    const double th = x(1), w = x(3), F = u(0);
    const double s = std::sin(th), c = std::cos(th);
    const double D = m1 + m2 * s * s;
    const double D_th = 2.0 * m2 * s * c;

    const double Na = l * m2 * s * w * w + F + m2 * g * c * s;
    const double Na_th = l * m2 * c * w * w + m2 * g * (c * c - s * s);
    const double Na_w = 2.0 * l * m2 * s * w;

    const double Nb = -(l * m2 * c * s * w * w + F * c + (m1 + m2) * g * s);
    const double Nb_th = -(l * m2 * (c * c - s * s) * w * w - F * s + (m1 + m2) * g * c);
    const double Nb_w = -2.0 * l * m2 * c * s * w;

    A.setZero(4, 4);
    A(0, 2) = 1.0;
    A(1, 3) = 1.0;
    A(2, 1) = (Na_th * D - Na * D_th) / (D * D);
    A(2, 3) = Na_w / D;
    A(3, 1) = (Nb_th * D - Nb * D_th) / (l * D * D);
    A(3, 3) = Nb_w / (l * D);

    B.setZero(4, 1);
    B(2, 0) = 1.0 / D;
    B(3, 0) = -c / (l * D);
  }

  /// Kinetic plus potential energy (pivot height as the reference).
  double energy(const Vector& x) const {
    const double m1 = p_.cart_mass, m2 = p_.pole_mass, l = p_.pole_length;
    const double v = x(2), w = x(3), c = std::cos(x(1));
    return 0.5 * (m1 + m2) * v * v + m2 * l * v * w * c + 0.5 * m2 * l * l * w * w -
           m2 * p_.gravity * l * c;
  }

  /// |F| <= force_max and |p| <= rail_half_length as four affine rows.
  ConstraintSet constraints() const {
    ConstraintSet set(4, 1);
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::Control, 0, -p_.force_max, p_.force_max, 4, 1));
    set.add_stage(std::make_shared<BoundConstraint>(
        BoundConstraint::Target::State, 0, -p_.rail_half_length, p_.rail_half_length, 4, 1));
    return set;
  }

 private:
  CartPoleParams p_;
};

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_CARTPOLE_HPP
