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
#ifndef HMDDP_CLI_EXPERIMENT_HPP
#define HMDDP_CLI_EXPERIMENT_HPP

#include "hmddp/cli/manifest.hpp"
#include "hmddp/hybrid.hpp"
#include "hmddp/systems/benchmarks.hpp"
#include "hmddp/systems/linear.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hmddp::cli {

/// Everything a run or verify needs, resolved from a manifest.
struct Experiment {
  std::string system;
  ProblemDefinition problem;
  HmddpConfig config;
  systems::SampleBox box;
  int seed = 0;
  int verify_samples = 100;
  double verify_tolerance = 1e-5;
  std::optional<systems::RiccatiSolution> riccati;  // lqr only
  std::string manifest_hash;
};

namespace detail {

inline Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

inline Matrix to_matrix(const Manifest& m, const std::string& key) {
  const NumberRows rows = m.rows(key);
  if (rows.empty()) m.fail(key, "matrix must have at least one row");
  const std::size_t cols = rows.front().size();
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) m.fail(key, "rows have different lengths");
    for (std::size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

inline std::vector<systems::Circle> circles(const Manifest& m, const std::string& key,
                                            std::vector<systems::Circle> fallback) {
  if (!m.has(key)) return fallback;
  std::vector<systems::Circle> out;
  for (const auto& row : m.rows(key)) {
    if (row.size() != 3) m.fail(key, "each obstacle is [cx, cy, radius]");
    out.push_back({row[0], row[1], row[2]});
  }
  return out;
}

inline Vector sized_vector(const Manifest& m, const std::string& key, int dim) {
  const Vector v = to_vector(m.vector(key));
  if (v.size() != dim) {
    m.fail(key, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

inline systems::Scenario scenario(const Manifest& m, systems::Scenario s, int n) {
  m.require("problem.dt");
  s.dt = m.number("problem.dt", s.dt);
  if (m.has("problem.duration") && m.has("problem.horizon")) {
    m.fail("problem.horizon", "give either duration or horizon, not both");
  }
  if (m.has("problem.duration")) s.duration = m.number("problem.duration", s.duration);
  if (m.has("problem.horizon")) s.duration = m.integer("problem.horizon", 1) * s.dt;
  s.segments = m.integer("problem.segments", s.segments);
  if (m.has("problem.x_init")) s.x_init = sized_vector(m, "problem.x_init", n);
  if (m.has("problem.x_goal")) s.x_goal = sized_vector(m, "problem.x_goal", n);
  s.q = m.number("cost.q", s.q);
  s.r = m.number("cost.r", s.r);
  s.qf = m.number("cost.qf", s.qf);
  return s;
}

/// Node states for user-supplied initialization: one CSV row per node.
inline std::vector<Vector> read_nodes(const Manifest& m, int n) {
  const std::string key = "init.node_file";
  m.require(key);
  std::filesystem::path file = m.string(key);
  if (file.is_relative() && !m.path().empty()) {
    file = std::filesystem::path(m.path()).parent_path() / file;
  }
  std::ifstream in(file);
  if (!in) m.fail(key, "cannot open '" + file.string() + "'");
  std::vector<Vector> nodes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::vector<double> row;
    try {
      auto v = hmddp::cli::detail::ValueReader("[" + line + "]").read();
      row = std::get<std::vector<double>>(v);
    } catch (const std::exception&) {
      throw ManifestError(file.string() + ":" + std::to_string(line_no) +
                          ": expected comma-separated numbers");
    }
    if (static_cast<int>(row.size()) != n) {
      throw ManifestError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(n) + " entries, got " + std::to_string(row.size()));
    }
    nodes.push_back(to_vector(row));
  }
  return nodes;
}

inline void solver_config(const Manifest& m, HmddpConfig& c) {
  c.mddp.eps_v = m.number("mddp.eps_v", c.mddp.eps_v);
  c.mddp.eps_q = m.number("mddp.eps_q", c.mddp.eps_q);
  c.mddp.d_max = m.number("mddp.d_max", c.mddp.d_max);
  c.mddp.max_iter = m.integer("mddp.max_iter", c.mddp.max_iter);
  c.ls.alpha0 = m.number("linesearch.alpha0", c.ls.alpha0);
  c.ls.factor = m.number("linesearch.factor", c.ls.factor);
  c.ls.trials = m.integer("linesearch.trials", c.ls.trials);
  c.ls.defect_weight = m.number("linesearch.defect_weight", c.ls.defect_weight);
  c.ls.r_lo = m.number("linesearch.r_lo", c.ls.r_lo);
  c.ls.r_hi = m.number("linesearch.r_hi", c.ls.r_hi);
  c.reg.mu = m.number("reg.mu", c.reg.mu);
  c.reg.mu0 = m.number("reg.mu0", c.reg.mu0);
  c.reg.sigma = m.number("reg.sigma", c.reg.sigma);
  c.reg.mu_max = m.number("reg.mu_max", c.reg.mu_max);
  c.al.lambda0 = m.number("al.lambda0", c.al.lambda0);
  c.al.mu0 = m.number("al.mu0", c.al.mu0);
  c.al.phi = m.number("al.phi", c.al.phi);
  c.al.c_max = m.number("al.c_max", c.al.c_max);
  c.al.max_outer = m.integer("al.max_outer", c.al.max_outer);
  c.al.require_inner_convergence =
      m.boolean("al.require_inner_convergence", c.al.require_inner_convergence);
  c.rlb.psi0 = m.number("rlb.psi0", c.rlb.psi0);
  c.rlb.delta0 = m.number("rlb.delta0", c.rlb.delta0);
  c.rlb.omega1 = m.number("rlb.omega1", c.rlb.omega1);
  c.rlb.omega2 = m.number("rlb.omega2", c.rlb.omega2);
  c.rlb.delta_min = m.number("rlb.delta_min", c.rlb.delta_min);
  c.rlb.tol = m.number("rlb.tol", c.rlb.tol);
  c.rlb.psi_stop = m.number("rlb.psi_stop", c.rlb.psi_stop);
  c.rlb.max_outer = m.integer("rlb.max_outer", c.rlb.max_outer);
}

inline systems::SampleBox symmetric_box(int n, int m, double radius) {
  return {Vector::Constant(n, -radius), Vector::Constant(n, radius),
          Vector::Constant(m, -radius), Vector::Constant(m, radius)};
}

inline systems::Benchmark linear_benchmark(const Manifest& man) {
  man.require("linear.A");
  man.require("linear.B");
  const Matrix A = to_matrix(man, "linear.A");
  const Matrix B = to_matrix(man, "linear.B");
  const Matrix JA = man.has("linear.jac_A") ? to_matrix(man, "linear.jac_A") : A;
  const Matrix JB = man.has("linear.jac_B") ? to_matrix(man, "linear.jac_B") : B;
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (A.cols() != n) man.fail("linear.A", "must be square");
  if (B.rows() != n) man.fail("linear.B", "must have as many rows as A");
  if (JA.rows() != n || JA.cols() != n) man.fail("linear.jac_A", "must match the shape of A");
  if (JB.rows() != n || JB.cols() != m) man.fail("linear.jac_B", "must match the shape of B");

  systems::Scenario s;
  s.x_init = Vector::Zero(n);
  s.x_goal = Vector::Zero(n);
  s = scenario(man, s, n);

  ConstraintSet cons(n, m);
  const bool lo = man.has("linear.u_min"), hi = man.has("linear.u_max");
  if (lo || hi) {
    const Vector umin = lo ? sized_vector(man, "linear.u_min", m)
                           : Vector::Constant(m, -BoundConstraint::kNone);
    const Vector umax = hi ? sized_vector(man, "linear.u_max", m)
                           : Vector::Constant(m, BoundConstraint::kNone);
    for (int i = 0; i < m; ++i) {
      if (!(umin(i) < umax(i))) man.fail("linear.u_min", "must be below u_max");
      cons.add_stage(std::make_shared<BoundConstraint>(BoundConstraint::Target::Control, i,
                                                       umin(i), umax(i), n, m));
    }
  }

  systems::Benchmark b;
  b.name = "custom-linear";
  b.problem.dynamics = std::make_shared<systems::LinearDynamics>(A, B, JA, JB);
  b.problem.cost = std::make_shared<QuadraticCost>(
      QuadraticCost::diagonal(n, m, s.q, s.r, s.qf, s.x_goal));
  b.problem.constraints = std::move(cons);
  b.problem.x_init = s.x_init;
  b.problem.x_goal = s.x_goal;
  b.problem.horizon = s.horizon();
  b.problem.dt = s.dt;
  b.problem.segments = s.segments;
  b.default_control = Vector::Zero(m);
  b.box = symmetric_box(n, m, man.number("verify.radius", 1.0));
  return b;
}

}  // namespace detail

inline const std::vector<std::string>& known_systems() {
  static const std::vector<std::string> names = {"cartpole", "car2d", "quadrotor", "lqr",
                                                 "custom-linear"};
  return names;
}

/// Resolves a manifest into a validated problem plus solver configuration.
inline Experiment build_experiment(const Manifest& man) {
  using namespace hmddp::systems;
  man.require("problem.system");
  Experiment e;
  e.system = man.string("problem.system");
  e.seed = man.integer("problem.seed", 0);
  e.verify_samples = man.integer("verify.samples", e.verify_samples);
  e.verify_tolerance = man.number("verify.tolerance", e.verify_tolerance);
  e.manifest_hash = man.hash();
  if (e.verify_samples < 1) man.fail("verify.samples", "must be >= 1");

  Benchmark b;
  try {
    if (e.system == "cartpole") {
      CartPoleParams p;
      p.cart_mass = man.number("cartpole.cart_mass", p.cart_mass);
      p.pole_mass = man.number("cartpole.pole_mass", p.pole_mass);
      p.pole_length = man.number("cartpole.pole_length", p.pole_length);
      p.gravity = man.number("cartpole.gravity", p.gravity);
      p.force_max = man.number("cartpole.force_max", p.force_max);
      p.rail_half_length = man.number("cartpole.rail_half_length", p.rail_half_length);
      b = cartpole_benchmark(p, detail::scenario(man, cartpole_scenario(), 4));
    } else if (e.system == "car2d") {
      PlanarCarParams p = car2d_params();
      p.omega_max = man.number("car2d.omega_max", p.omega_max);
      p.accel_max = man.number("car2d.accel_max", p.accel_max);
      p.obstacles = detail::circles(man, "car2d.obstacles", p.obstacles);
      b = car2d_benchmark(p, detail::scenario(man, car2d_scenario(), 4));
    } else if (e.system == "quadrotor") {
      PlanarQuadrotorParams p = quadrotor_params();
      p.mass = man.number("quadrotor.mass", p.mass);
      p.inertia = man.number("quadrotor.inertia", p.inertia);
      p.arm_length = man.number("quadrotor.arm_length", p.arm_length);
      p.gravity = man.number("quadrotor.gravity", p.gravity);
      p.thrust_min = man.number("quadrotor.thrust_min", p.thrust_min);
      p.tilt_max = man.number("quadrotor.tilt_max", p.tilt_max);
      p.obstacles = detail::circles(man, "quadrotor.obstacles", p.obstacles);
      b = quadrotor_benchmark(p, detail::scenario(man, quadrotor_scenario(), 6));
    } else if (e.system == "lqr") {
      man.require("lqr.n");
      man.require("lqr.m");
      man.require("problem.horizon");
      if (man.has("problem.x_init")) man.fail("problem.x_init", "lqr draws x_init from the seed");
      const int n = man.integer("lqr.n", 1), m = man.integer("lqr.m", 1);
      if (n < 1 || m < 1) man.fail("lqr.n", "dimensions must be positive");
      const int N = man.integer("problem.horizon", 1);
      const double dt = man.number("problem.dt", 0.01);
      LqrFixture f = lqr_fixture(n, m, N, static_cast<unsigned>(e.seed));
      f.problem.dt = dt;
      b.name = "lqr";
      b.problem = f.problem;
      b.default_control = Vector::Zero(m);
      b.box = detail::symmetric_box(n, m, man.number("verify.radius", 1.0));
      e.riccati = f.oracle;
    } else if (e.system == "custom-linear") {
      b = detail::linear_benchmark(man);
    } else {
      man.fail("problem.system", "unknown system '" + e.system + "'");
    }
  } catch (const ProblemError& err) {
    throw ManifestError(man.origin() + ":0: " + err.what());
  }

  e.problem = std::move(b.problem);
  e.box = std::move(b.box);
  e.config.default_control = b.default_control;
  if (man.has("init.default_control")) {
    e.config.default_control =
        detail::sized_vector(man, "init.default_control", e.problem.control_dim());
  }
  const std::string mode = man.string("init.mode", "interpolate");
  if (mode == "interpolate") {
    e.config.init_mode = InitMode::Interpolate;
  } else if (mode == "user") {
    e.config.init_mode = InitMode::UserSupplied;
    e.config.user_nodes = detail::read_nodes(man, e.problem.state_dim());
  } else {
    man.fail("init.mode", "expected \"interpolate\" or \"user\"");
  }

  detail::solver_config(man, e.config);
  try {
    e.problem.validate();
    e.config.validate();
  } catch (const ProblemError& err) {
    throw ManifestError(man.origin() + ":0: " + err.what());
  }
  return e;
}

}  // namespace hmddp::cli

#endif  // HMDDP_CLI_EXPERIMENT_HPP
