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
#ifndef HMDDP_SYSTEMS_BENCHMARKS_HPP
#define HMDDP_SYSTEMS_BENCHMARKS_HPP

#include "hmddp/core.hpp"
#include "hmddp/systems/car2d.hpp"
#include "hmddp/systems/cartpole.hpp"
#include "hmddp/systems/derivative_check.hpp"
#include "hmddp/systems/quadrotor.hpp"
#include "hmddp/systems/rk4.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hmddp::systems {

/// Horizon, boundary states and quadratic weights of a benchmark run.
struct Scenario {
  double duration = 1.0;
  double dt = 0.01;
  int segments = 1;
  Vector x_init;
  Vector x_goal;
  double q = 1.0;
  double r = 0.1;
  double qf = 50.0;

  int horizon() const {
    const long n = std::lround(duration / dt);
    if (n < 1 || std::abs(n * dt - duration) > 1e-9 * std::max(1.0, duration)) {
      throw ProblemError("scenario: duration must be a positive multiple of dt");
    }
    return static_cast<int>(n);
  }
};

struct Benchmark {
  std::string name;
  ProblemDefinition problem;
  Vector default_control;
  SampleBox box;
};

inline Scenario cartpole_scenario() {
  Scenario s;
  s.duration = 3.0;
  s.dt = 0.01;
  s.segments = 10;
  s.x_init = Vector::Zero(4);
  s.x_goal = Vector(4);
  s.x_goal << 0.0, std::numbers::pi, 0.0, 0.0;
  return s;
}

inline PlanarCarParams car2d_params() {
  PlanarCarParams p;
  p.obstacles = {{1.0, 1.0, 0.5}, {2.2, 2.2, 0.4}};
  return p;
}

inline Scenario car2d_scenario() {
  Scenario s;
  s.duration = 5.0;
  s.dt = 0.01;
  s.segments = 5;
  s.x_init = Vector::Zero(4);
  s.x_goal = Vector(4);
  s.x_goal << 3.0, 3.0, std::numbers::pi / 2.0, 0.0;
  return s;
}

inline PlanarQuadrotorParams quadrotor_params() {
  PlanarQuadrotorParams p;
  p.obstacles = {{1.0, 1.0, 0.4}};
  return p;
}

inline Scenario quadrotor_scenario() {
  Scenario s;
  s.duration = 3.0;
  s.dt = 0.01;
  s.segments = 30;
  s.x_init = Vector::Zero(6);
  s.x_goal = Vector::Zero(6);
  s.x_goal(0) = 2.0;
  s.x_goal(1) = 2.0;
  return s;
}

namespace detail {

template <VectorField Field>
ProblemDefinition make_problem(Field field, ConstraintSet cons, const Scenario& s) {
  const int n = field.state_dim();
  const int m = field.control_dim();
  require_dim(s.x_init, n, "scenario x_init");
  require_dim(s.x_goal, n, "scenario x_goal");
  ProblemDefinition p;
  p.dynamics = discretize(std::move(field), s.dt);
  p.cost = std::make_shared<QuadraticCost>(
      QuadraticCost::diagonal(n, m, s.q, s.r, s.qf, s.x_goal));
  p.constraints = std::move(cons);
  p.x_init = s.x_init;
  p.x_goal = s.x_goal;
  p.horizon = s.horizon();
  p.dt = s.dt;
  p.segments = s.segments;
  p.validate();
  return p;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace detail

inline Benchmark cartpole_benchmark(const CartPoleParams& params = {},
                                    const Scenario& s = cartpole_scenario()) {
  CartPole field(params);
  Benchmark b;
  b.name = "cartpole";
  b.problem = detail::make_problem(field, field.constraints(), s);
  b.default_control = Vector::Zero(1);
  b.box = {detail::vec({-1, -4, -3, -6}), detail::vec({1, 4, 3, 6}),
           detail::vec({-6}), detail::vec({6})};
  return b;
}

inline Benchmark car2d_benchmark(const PlanarCarParams& params = car2d_params(),
                                 const Scenario& s = car2d_scenario()) {
  PlanarCar field(params);
  Benchmark b;
  b.name = "car2d";
  b.problem = detail::make_problem(field, field.constraints(), s);
  b.default_control = Vector::Zero(2);
  b.box = {detail::vec({-1, -1, -4, -3}), detail::vec({4, 4, 4, 3}),
           detail::vec({-3, -3}), detail::vec({3, 3})};
  return b;
}

inline Benchmark quadrotor_benchmark(const PlanarQuadrotorParams& params = quadrotor_params(),
                                     const Scenario& s = quadrotor_scenario()) {
  PlanarQuadrotor field(params);
  Benchmark b;
  b.name = "quadrotor";
  b.problem = detail::make_problem(field, field.constraints(), s);
  b.default_control = Vector::Constant(2, field.hover_thrust());
  b.box = {detail::vec({-1, -1, -1, -3, -3, -5}), detail::vec({3, 3, 1, 3, 3, 5}),
           detail::vec({0, 0}), detail::vec({6, 6})};
  return b;
}

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_BENCHMARKS_HPP
