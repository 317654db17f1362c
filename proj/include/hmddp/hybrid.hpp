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
#ifndef HMDDP_HYBRID_HPP
#define HMDDP_HYBRID_HPP

#include "hmddp/al_stage.hpp"
#include "hmddp/core.hpp"
#include "hmddp/mddp.hpp"
#include "hmddp/rlb_stage.hpp"

#include <chrono>
#include <string>
#include <vector>

namespace hmddp {

enum class InitMode { Interpolate, UserSupplied };

struct HmddpConfig {
  MddpConfig mddp;
  LineSearchConfig ls;
  RegState reg;
  AlConfig al;
  RlbConfig rlb;
  InitMode init_mode = InitMode::Interpolate;
  Vector default_control;             // empty means zero
  std::vector<Vector> user_nodes;     // UserSupplied: M node states
  std::vector<Vector> user_controls;  // UserSupplied: N controls (optional)

  void validate() const {
    mddp.validate();
    ls.validate();
    reg.validate();
    al.validate();
    rlb.validate();
  }
};

struct NodeInit {
  std::vector<Vector> nodes;
  std::vector<Vector> controls;
};

/**
 * Interpolate: node j is x_init + j/(M-1) (x_goal - x_init); controls are the
 * configured default. UserSupplied: nodes taken verbatim, node 0 := x_init.
 */
inline NodeInit initialize_nodes(const ProblemDefinition& problem, const HmddpConfig& cfg) {
  const int n = problem.state_dim();
  const int m = problem.control_dim();
  const int M = problem.segments;
  const int N = problem.horizon;
  NodeInit init;

  Vector u0 = Vector::Zero(m);
  if (cfg.default_control.size() != 0) {
    require_dim(cfg.default_control, m, "default control");
    u0 = cfg.default_control;
  }

  if (cfg.init_mode == InitMode::Interpolate) {
    for (int j = 0; j < M; ++j) {
      const double s = M == 1 ? 0.0 : static_cast<double>(j) / (M - 1);
      init.nodes.push_back(problem.x_init + s * (problem.x_goal - problem.x_init));
    }
    init.controls.assign(N, u0);
    return init;
  }

  if (static_cast<int>(cfg.user_nodes.size()) != M) {
    throw ProblemError("initialize_nodes: expected " + std::to_string(M) +
                       " node states, got " + std::to_string(cfg.user_nodes.size()));
  }
  for (const auto& x : cfg.user_nodes) require_dim(x, n, "user node state");
  init.nodes = cfg.user_nodes;
  init.nodes[0] = problem.x_init;
  if (cfg.user_controls.empty()) {
    init.controls.assign(N, u0);
  } else {
    if (static_cast<int>(cfg.user_controls.size()) != N) {
      throw ProblemError("initialize_nodes: expected " + std::to_string(N) + " controls");
    }
    for (const auto& u : cfg.user_controls) require_dim(u, m, "user control");
    init.controls = cfg.user_controls;
  }
  return init;
}

struct StageSummary {
  std::string stage;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  int outer_iterations = 0;
  double seconds = 0.0;
};

struct HmddpResult {
  SolveResult result;
  ShootingStructure shoot;
  std::vector<StageSummary> stages;
  int rlb_first_feasible_outer = -1;
  std::vector<double> al_penalty_history;
  std::vector<double> al_lambda_min_history;
  std::vector<double> rlb_psi_history;
  std::vector<double> rlb_delta_history;
  bool defects_closed = false;
};

namespace detail {

inline void append_log(SolveResult& into, const SolveResult& from) {
  int next = into.iterations.empty() ? 0 : into.iterations.back().iter;
  for (auto rec : from.iterations) {
    rec.iter = ++next;
    into.iterations.push_back(rec);
  }
}

inline bool finite_trajectory(const Trajectory& t) {
  for (const auto& x : t.states) {
    if (!all_finite(x)) return false;
  }
  for (const auto& u : t.controls) {
    if (!all_finite(u)) return false;
  }
  return true;
}

/// Re-rolls a converged multiple-shooting iterate into a single consistent rollout.
inline void finalize(HmddpResult& out, const ProblemDefinition& problem, double tol) {
  if (out.result.status != SolveStatus::Converged) return;
  Trajectory closed = close_defects(out.result.trajectory, *problem.dynamics);
  if (max_violation(closed, problem.constraints) <= tol) {
    out.result.trajectory = std::move(closed);
    out.shoot = make_shooting(problem.horizon, 1);
    out.defects_closed = true;
  }
}

}  // namespace detail

/// Plain MDDP on J (constraints ignored by the solver, still reported).
inline HmddpResult solve_mddp_only(const ProblemDefinition& problem, const HmddpConfig& cfg) {
  problem.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const NodeInit init = initialize_nodes(problem, cfg);
  auto [traj, shoot] = initial_rollout(init.nodes, init.controls, *problem.dynamics, problem.dt);
  HmddpResult out;
  auto res = solve_mddp(problem, *problem.cost, std::move(traj), std::move(shoot), cfg.mddp,
                        cfg.ls, cfg.reg, "mddp");
  out.stages.push_back({"mddp", res.result.status,
                        static_cast<int>(res.result.iterations.size()), 0,
                        res.result.solve_seconds});
  detail::append_log(out.result, res.result);
  out.result.status = res.result.status;
  out.result.trajectory = std::move(res.result.trajectory);
  out.shoot = std::move(res.shoot);
  detail::finalize(out, problem, std::numeric_limits<double>::infinity());
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Pure AL-MDDP driven to the final tolerance with the MaxIter budget.
inline HmddpResult solve_al_only(const ProblemDefinition& problem, const HmddpConfig& cfg) {
  problem.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const NodeInit init = initialize_nodes(problem, cfg);
  auto [traj, shoot] = initial_rollout(init.nodes, init.controls, *problem.dynamics, problem.dt);
  AlConfig al = cfg.al;
  al.c_max = cfg.rlb.tol;
  al.max_outer = cfg.mddp.max_iter;
  al.require_inner_convergence = true;
  auto res = solve_al(problem, std::move(traj), std::move(shoot), al, cfg.mddp, cfg.ls, cfg.reg);
  HmddpResult out;
  out.stages.push_back({"al", res.result.status,
                        static_cast<int>(res.result.iterations.size()),
                        static_cast<int>(res.result.iterations.size()),
                        res.result.solve_seconds});
  out.al_penalty_history = res.penalty_history;
  out.al_lambda_min_history = res.lambda_min_history;
  detail::append_log(out.result, res.result);
  out.result.status = res.result.status;
  out.result.trajectory = std::move(res.result.trajectory);
  out.shoot = std::move(res.shoot);
  detail::finalize(out, problem, cfg.rlb.tol);
  if (out.result.status == SolveStatus::Converged && !out.defects_closed) {
    out.result.status = SolveStatus::MaxIterations;
  }
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/**
 * @brief Two-stage solve: AL-MDDP to a coarse tolerance, then RLB-MDDP
 * warm-started from the AL iterate. Unconstrained problems run plain MDDP.
 */
inline HmddpResult solve(const ProblemDefinition& problem, const HmddpConfig& cfg) {
  if (problem.constraints.empty()) return solve_mddp_only(problem, cfg);
  problem.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const NodeInit init = initialize_nodes(problem, cfg);
  auto [traj, shoot] = initial_rollout(init.nodes, init.controls, *problem.dynamics, problem.dt);

  HmddpResult out;
  auto al = solve_al(problem, std::move(traj), std::move(shoot), cfg.al, cfg.mddp, cfg.ls, cfg.reg);
  out.stages.push_back({"al", al.result.status,
                        static_cast<int>(al.result.iterations.size()),
                        static_cast<int>(al.result.iterations.size()),
                        al.result.solve_seconds});
  out.al_penalty_history = al.penalty_history;
  out.al_lambda_min_history = al.lambda_min_history;
  detail::append_log(out.result, al.result);

  if (!detail::finite_trajectory(al.result.trajectory)) {
    out.result.status = al.result.status;
    out.result.trajectory = std::move(al.result.trajectory);
    out.shoot = std::move(al.shoot);
    return out;
  }

  auto rlb = solve_rlb(problem, al.result.trajectory, al.shoot, cfg.rlb, cfg.mddp, cfg.ls, cfg.reg);
  out.stages.push_back({"rlb", rlb.result.status,
                        static_cast<int>(rlb.result.iterations.size()),
                        rlb.outer_iterations, rlb.result.solve_seconds});
  out.rlb_first_feasible_outer = rlb.first_feasible_outer;
  out.rlb_psi_history = rlb.psi_history;
  out.rlb_delta_history = rlb.delta_history;
  detail::append_log(out.result, rlb.result);
  out.result.status = rlb.result.status;
  out.result.trajectory = std::move(rlb.result.trajectory);
  out.shoot = std::move(rlb.shoot);
  detail::finalize(out, problem, cfg.rlb.tol);
  out.result.stage_seconds = {al.result.solve_seconds, rlb.result.solve_seconds};
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hmddp

#endif  // HMDDP_HYBRID_HPP
