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
#ifndef HMDDP_MDDP_HPP
#define HMDDP_MDDP_HPP

#include "hmddp/core.hpp"
#include "hmddp/globalization.hpp"

#include <chrono>
#include <optional>
#include <utility>
#include <vector>

namespace hmddp {

/**
 * @brief Segment layout of a multiple-shooting trajectory.
 *
 * Segment j starts at node_indices[j]; defects[j] is the gap between the
 * propagated end of segment j and the node of segment j+1, located at step
 * boundary_step(j) = node_indices[j+1] - 1.
 */
struct ShootingStructure {
  std::vector<int> node_indices{0};
  std::vector<Vector> defects;
  int horizon = 0;

  int segments() const { return static_cast<int>(node_indices.size()); }
  int boundary_step(int j) const { return node_indices[j + 1] - 1; }

  /// Index of the boundary whose defect sits at step k, or -1 inside a segment.
  int boundary_at(int k) const {
    for (int j = 0; j + 1 < segments(); ++j) {
      if (boundary_step(j) == k) return j;
    }
    return -1;
  }

  double defect_sq() const {
    double s = 0.0;
    for (const auto& d : defects) s += d.squaredNorm();
    return s;
  }
  double defect_norm() const { return std::sqrt(defect_sq()); }
};

/// N steps into M contiguous segments; the remainder goes to the leading ones.
inline ShootingStructure make_shooting(int horizon, int segments) {
  if (horizon < 1) throw ProblemError("shooting: horizon must be positive");
  if (segments < 1 || segments > horizon) {
    throw ProblemError("shooting: need 1 <= M <= N");
  }
  ShootingStructure s;
  s.horizon = horizon;
  s.node_indices.clear();
  const int base = horizon / segments;
  const int extra = horizon % segments;
  int start = 0;
  for (int j = 0; j < segments; ++j) {
    s.node_indices.push_back(start);
    start += base + (j < extra ? 1 : 0);
  }
  return s;
}

inline void recompute_defects(const Trajectory& traj, ShootingStructure& shoot,
                              const DynamicsModel& dyn) {
  shoot.defects.resize(shoot.segments() - 1);
  for (int j = 0; j + 1 < shoot.segments(); ++j) {
    const int k = shoot.boundary_step(j);
    Vector d = dyn.step(traj.states[k], traj.controls[k]) - traj.states[k + 1];
    if (!all_finite(d)) throw NumericalError("recompute_defects: non-finite dynamics");
    shoot.defects[j] = std::move(d);
  }
}

/// Rolls each segment forward from its node under u_init (initial forward pass).
inline std::pair<Trajectory, ShootingStructure> initial_rollout(
    const std::vector<Vector>& nodes, const std::vector<Vector>& u_init,
    const DynamicsModel& dyn, double dt) {
  const int N = static_cast<int>(u_init.size());
  const int M = static_cast<int>(nodes.size());
  ShootingStructure shoot = make_shooting(N, M);
  Trajectory traj(N, dyn.state_dim(), dyn.control_dim(), dt);
  for (int k = 0; k < N; ++k) {
    require_dim(u_init[k], dyn.control_dim(), "initial control");
    traj.controls[k] = u_init[k];
  }
  for (int j = 0; j < M; ++j) {
    require_dim(nodes[j], dyn.state_dim(), "node state");
    const int begin = shoot.node_indices[j];
    const int end = j + 1 < M ? shoot.node_indices[j + 1] : N + 1;
    traj.states[begin] = nodes[j];
    for (int k = begin; k + 1 < end; ++k) {
      traj.states[k + 1] = dyn.step(traj.states[k], traj.controls[k]);
      if (!all_finite(traj.states[k + 1])) {
        throw NumericalError("initial_rollout: non-finite state at step " +
                             std::to_string(k + 1));
      }
    }
  }
  recompute_defects(traj, shoot, dyn);
  return {std::move(traj), std::move(shoot)};
}

struct BackwardPassResult {
  bool success = false;
  int failed_step = -1;
  std::vector<Vector> kff;
  std::vector<Matrix> Kfb;
  std::vector<Matrix> fx, fu;
  std::vector<Vector> Vx;        // N+1
  std::vector<Matrix> Vxx;       // N+1
  std::vector<Vector> Qu;
  std::vector<Matrix> Quu;       // unregularized
  std::vector<Matrix> Quu_reg;   // with mu_V * I added to V_xx
  double dV1 = 0.0;
  double dV2 = 0.0;

  double max_feedforward() const {
    double m = 0.0;
    for (const auto& k : kff) m = std::max(m, k.lpNorm<Eigen::Infinity>());
    return m;
  }
};

/**
 * @brief Gauss-Newton backward recursion with defect-corrected value gradient.
 *
 * Q_x and Q_u use V+_x = V_x + V_xx d at segment boundaries. The control
 * sub-Hessians are regularized through V_xx + mu_V I; value propagation uses
 * the resulting gains against the unregularized Q blocks, which coincides
 * with the closed-form Q_uu^{-1} update when mu_V = 0.
 */
inline BackwardPassResult backward_pass(const Trajectory& traj,
                                        const ShootingStructure& shoot,
                                        const DynamicsModel& dyn,
                                        const CostModel& cost, double mu_V) {
  const int N = traj.horizon();
  const int n = dyn.state_dim();
  BackwardPassResult bp;
  bp.kff.resize(N);
  bp.Kfb.resize(N);
  bp.fx.resize(N);
  bp.fu.resize(N);
  bp.Vx.resize(N + 1);
  bp.Vxx.resize(N + 1);
  bp.Qu.resize(N);
  bp.Quu.resize(N);
  bp.Quu_reg.resize(N);

  std::vector<int> boundary(N, -1);
  for (int j = 0; j + 1 < shoot.segments(); ++j) boundary[shoot.boundary_step(j)] = j;

  TerminalCostDerivatives term;
  cost.terminal_derivatives(traj.states[N], term);
  bp.Vx[N] = term.lx;
  bp.Vxx[N] = 0.5 * (term.lxx + term.lxx.transpose());

  StageCostDerivatives l;
  const Matrix I = Matrix::Identity(n, n);
  for (int k = N - 1; k >= 0; --k) {
    const Vector& x = traj.states[k];
    const Vector& u = traj.controls[k];
    dyn.jacobians(x, u, bp.fx[k], bp.fu[k]);
    cost.running_derivatives(x, u, k, l);
    const Matrix& fx = bp.fx[k];
    const Matrix& fu = bp.fu[k];
    const Matrix& Vxx = bp.Vxx[k + 1];

    Vector Vx_plus = bp.Vx[k + 1];
    if (boundary[k] >= 0) Vx_plus += Vxx * shoot.defects[boundary[k]];

    const Vector Qx = l.lx + fx.transpose() * Vx_plus;
    const Vector Qu = l.lu + fu.transpose() * Vx_plus;
    const Matrix Qxx = l.lxx + fx.transpose() * Vxx * fx;
    const Matrix Quu = l.luu + fu.transpose() * Vxx * fu;
    const Matrix Qux = l.lux + fu.transpose() * Vxx * fx;

    const Matrix Vreg = Vxx + mu_V * I;
    Matrix Quu_reg = l.luu + fu.transpose() * Vreg * fu;
    Quu_reg = 0.5 * (Quu_reg + Quu_reg.transpose()).eval();
    const Matrix Qux_reg = l.lux + fu.transpose() * Vreg * fx;

    Eigen::LLT<Matrix> llt(Quu_reg);
    if (llt.info() != Eigen::Success || !Quu_reg.allFinite() || !Qu.allFinite()) {
      bp.success = false;
      bp.failed_step = k;
      return bp;
    }
    Vector kff = -llt.solve(Qu);
    Matrix K = -llt.solve(Qux_reg);

    bp.dV1 += kff.dot(Qu);
    bp.dV2 += kff.dot(Quu * kff);

    bp.Vx[k] = Qx + K.transpose() * (Quu * kff) + K.transpose() * Qu +
               Qux.transpose() * kff;
    Matrix Vxx_k = Qxx + K.transpose() * Quu * K + K.transpose() * Qux +
                   Qux.transpose() * K;
    bp.Vxx[k] = 0.5 * (Vxx_k + Vxx_k.transpose());

    bp.Qu[k] = Qu;
    bp.Quu[k] = Quu;
    bp.Quu_reg[k] = std::move(Quu_reg);
    bp.kff[k] = std::move(kff);
    bp.Kfb[k] = std::move(K);
  }
  bp.success = true;
  return bp;
}

struct ForwardPassResult {
  Trajectory traj;
  ShootingStructure shoot;
  double merit = 0.0;
  bool finite = false;
};

/**
 * @brief Applies u = u + a*kff + K(x_hat - x) and the linearized node update.
 *
 * Inside a segment the state is integrated through f; at a segment start the
 * node moves by fx*dx + fu*du + d of the preceding boundary step.
 */
inline ForwardPassResult forward_pass(const Trajectory& nominal,
                                      const ShootingStructure& shoot,
                                      const BackwardPassResult& bp, double alpha,
                                      const DynamicsModel& dyn,
                                      const CostModel& objective) {
  const int N = nominal.horizon();
  ForwardPassResult fp;
  fp.traj = nominal;
  fp.shoot = shoot;
  Trajectory& out = fp.traj;

  std::vector<int> boundary(N, -1);
  for (int j = 0; j + 1 < shoot.segments(); ++j) boundary[shoot.boundary_step(j)] = j;

  out.states[0] = nominal.states[0];
  for (int k = 0; k < N; ++k) {
    const Vector dx = out.states[k] - nominal.states[k];
    const Vector du = alpha * bp.kff[k] + bp.Kfb[k] * dx;
    out.controls[k] = nominal.controls[k] + du;
    out.gains[k] = bp.Kfb[k];
    if (boundary[k] >= 0) {
      out.states[k + 1] = nominal.states[k + 1] + bp.fx[k] * dx + bp.fu[k] * du +
                          shoot.defects[boundary[k]];
    } else {
      out.states[k + 1] = dyn.step(out.states[k], out.controls[k]);
    }
    if (!all_finite(out.states[k + 1]) || !all_finite(out.controls[k])) return fp;
  }
  try {
    recompute_defects(out, fp.shoot, dyn);
    fp.merit = total_cost(out, objective);
  } catch (const NumericalError&) {
    return fp;
  }
  fp.finite = std::isfinite(fp.merit);
  return fp;
}

/// Single-shooting rollout under the stored feedback policy; all defects vanish.
inline Trajectory close_defects(const Trajectory& traj, const DynamicsModel& dyn) {
  Trajectory out = traj;
  for (int k = 0; k < traj.horizon(); ++k) {
    out.controls[k] = traj.controls[k] + traj.gains[k] * (out.states[k] - traj.states[k]);
    out.states[k + 1] = dyn.step(out.states[k], out.controls[k]);
    if (!all_finite(out.states[k + 1])) {
      throw NumericalError("close_defects: non-finite state");
    }
  }
  return out;
}

struct MddpConfig {
  double eps_v = 1e-7;
  double eps_q = 1e-6;
  double d_max = 1e-6;
  int max_iter = 100;

  void validate() const {
    if (!(eps_v > 0 && eps_q > 0 && d_max > 0)) throw ProblemError("mddp: tolerances must be positive");
    if (max_iter < 1) throw ProblemError("mddp: max_iter must be >= 1");
  }
};

enum class StepOutcome {
  Accepted,
  Converged,
  LineSearchFailed,
  RegularizationCapped,
  NumericalError
};

/**
 * @brief Iteration-level MDDP driver shared by every stage.
 *
 * Holds the nominal trajectory, shooting defects and regularization state.
 * The objective is borrowed; stages that mutate its parameters must call
 * refresh() before the next step.
 */
class MddpSolver {
 public:
  MddpSolver(const ProblemDefinition& problem, const CostModel& objective,
             Trajectory traj, ShootingStructure shoot, MddpConfig cfg,
             LineSearchConfig ls, RegState reg)
      : problem_(&problem), objective_(&objective), traj_(std::move(traj)),
        shoot_(std::move(shoot)), cfg_(cfg), ls_(ls), reg_(reg) {
    cfg_.validate();
    ls_.validate();
    reg_.validate();
    traj_.validate(problem.state_dim(), problem.control_dim());
    refresh();
  }

  void refresh() { merit_ = total_cost(traj_, *objective_); }

  /// One backward pass (bumping mu_V on Cholesky failure) plus a line search.
  StepOutcome step(IterationRecord& rec) {
    rec = IterationRecord{};
    rec.iter = ++iterations_;
    const DynamicsModel& dyn = *problem_->dynamics;

    BackwardPassResult bp;
    for (;;) {
      bp = backward_pass(traj_, shoot_, dyn, *objective_, reg_.mu);
      if (bp.success) break;
      if (!bump_regularization(reg_)) {
        fill(rec);
        return StepOutcome::RegularizationCapped;
      }
    }
    rec.mu_V = reg_.mu;
    last_max_kff_ = bp.max_feedforward();

    const double defect_sq = shoot_.defect_sq();
    if (last_max_kff_ < cfg_.eps_q && std::sqrt(defect_sq) < cfg_.d_max) {
      traj_.gains = bp.Kfb;
      rec.converged = true;
      fill(rec);
      return StepOutcome::Converged;
    }

    ForwardPassResult candidate;
    auto trial = [&](double alpha) -> std::optional<double> {
      candidate = forward_pass(traj_, shoot_, bp, alpha, dyn, *objective_);
      if (!candidate.finite) return std::nullopt;
      return candidate.merit;
    };
    const LineSearchOutcome ls =
        line_search(ls_, bp.dV1, bp.dV2, defect_sq, merit_, trial);

    if (ls.kind == LineSearchOutcome::Kind::Converged) {
      traj_.gains = bp.Kfb;
      rec.converged = true;
      fill(rec);
      return StepOutcome::Converged;
    }
    if (ls.kind == LineSearchOutcome::Kind::Failed) {
      // Coupled trigger: a failed search sends us back to the backward pass
      // with a larger state-value regularization.
      fill(rec);
      if (!bump_regularization(reg_)) return StepOutcome::RegularizationCapped;
      return StepOutcome::LineSearchFailed;
    }

    const double previous = merit_;
    traj_ = std::move(candidate.traj);
    shoot_ = std::move(candidate.shoot);
    merit_ = candidate.merit;
    if (ls.alpha >= 1.0) decay_regularization(reg_);

    rec.accepted = true;
    rec.alpha = ls.alpha;
    rec.ratio = ls.ratio;
    const bool small_change = std::abs(previous - merit_) < cfg_.eps_v;
    const bool small_step = last_max_kff_ < cfg_.eps_q;
    rec.converged = (small_change || small_step) && shoot_.defect_norm() < cfg_.d_max;
    fill(rec);
    return rec.converged ? StepOutcome::Converged : StepOutcome::Accepted;
  }

  const Trajectory& trajectory() const { return traj_; }
  const ShootingStructure& shooting() const { return shoot_; }
  const RegState& regularization() const { return reg_; }
  RegState& regularization() { return reg_; }
  double merit() const { return merit_; }
  int iterations() const { return iterations_; }
  const MddpConfig& config() const { return cfg_; }

 private:
  void fill(IterationRecord& rec) const {
    rec.merit = merit_;
    rec.cost = total_cost(traj_, *problem_->cost);
    rec.max_violation = max_violation(traj_, problem_->constraints);
    rec.defect_norm = shoot_.defect_norm();
  }

  const ProblemDefinition* problem_;
  const CostModel* objective_;
  Trajectory traj_;
  ShootingStructure shoot_;
  MddpConfig cfg_;
  LineSearchConfig ls_;
  RegState reg_;
  double merit_ = 0.0;
  double last_max_kff_ = 0.0;
  int iterations_ = 0;
};

inline SolveStatus status_from(StepOutcome last, bool converged) {
  if (converged) return SolveStatus::Converged;
  switch (last) {
    case StepOutcome::RegularizationCapped: return SolveStatus::RegularizationCapped;
    case StepOutcome::NumericalError: return SolveStatus::NumericalError;
    case StepOutcome::LineSearchFailed: return SolveStatus::LineSearchFailed;
    default: return SolveStatus::MaxIterations;
  }
}

struct MddpSolveOutput {
  SolveResult result;
  ShootingStructure shoot;
  RegState reg;
};

/// Runs MDDP iterations on `objective` until the stop test or max_iter.
inline MddpSolveOutput solve_mddp(const ProblemDefinition& problem,
                                  const CostModel& objective, Trajectory init,
                                  ShootingStructure shoot, const MddpConfig& cfg,
                                  const LineSearchConfig& ls, const RegState& reg,
                                  const std::string& stage = "mddp") {
  const auto t0 = std::chrono::steady_clock::now();
  MddpSolveOutput out;
  MddpSolver solver(problem, objective, std::move(init), std::move(shoot), cfg, ls, reg);
  StepOutcome last = StepOutcome::Accepted;
  bool converged = false;
  for (int i = 0; i < cfg.max_iter; ++i) {
    IterationRecord rec;
    try {
      last = solver.step(rec);
    } catch (const NumericalError&) {
      last = StepOutcome::NumericalError;
      break;
    }
    rec.stage = stage;
    out.result.iterations.push_back(rec);
    if (last == StepOutcome::Converged) {
      converged = true;
      break;
    }
    if (last == StepOutcome::RegularizationCapped) break;
  }
  out.result.status = status_from(last, converged);
  out.result.trajectory = solver.trajectory();
  out.shoot = solver.shooting();
  out.reg = solver.regularization();
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hmddp

#endif  // HMDDP_MDDP_HPP
