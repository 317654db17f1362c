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
#ifndef HMDDP_RLB_STAGE_HPP
#define HMDDP_RLB_STAGE_HPP

#include "hmddp/core.hpp"
#include "hmddp/mddp.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace hmddp {

struct RlbConfig {
  double psi0 = 0.1;
  double delta0 = 0.1;
  double omega1 = 0.2;
  double omega2 = 0.05;
  double delta_min = 1e-12;
  double tol = 1e-8;
  double psi_stop = 1e-7;  // barrier weight below which a feasible solve may stop
  int max_outer = 30;

  void validate() const {
    if (!(psi0 > 0.0 && delta0 > 0.0)) throw ProblemError("rlb: psi0, delta0 must be positive");
    if (!(omega1 > 0.0 && omega1 < 1.0)) throw ProblemError("rlb: omega1 must be in (0,1)");
    if (!(omega2 > 0.0 && omega2 < 1.0)) throw ProblemError("rlb: omega2 must be in (0,1)");
    if (!(delta_min > 0.0)) throw ProblemError("rlb: delta_min must be positive");
    if (!(tol >= 0.0)) throw ProblemError("rlb: tol must be >= 0");
    if (!(psi_stop >= 0.0)) throw ProblemError("rlb: psi_stop must be >= 0");
    if (max_outer < 1) throw ProblemError("rlb: max_outer must be >= 1");
  }
};

struct RlbState {
  double psi = 0.1;
  double delta = 0.1;
  double omega1 = 0.2;
  double omega2 = 0.05;
  double delta_min = 1e-12;
  double tol = 1e-8;

  static RlbState initial(const RlbConfig& c) {
    return {c.psi0, c.delta0, c.omega1, c.omega2, c.delta_min, c.tol};
  }
};

/// Barrier value and derivatives with respect to g.
struct BarrierValue {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/**
 * @brief Relaxed log barrier B(g) = psi * (-ln(-g)) for -g >= delta, else the
 * quadratic extension psi * beta(-g; delta),
 * beta(z; delta) = 1/2 (((z - 2 delta) / delta)^2 - 1) - ln(delta).
 *
 * Defined for every real g and C2 across the switch point.
 */
inline BarrierValue relaxed_barrier(double g, double psi, double delta) {
  const double z = -g;
  BarrierValue b;
  if (z >= delta) {
    b.value = -psi * std::log(z);
    b.d1 = psi / z;
    b.d2 = psi / (z * z);
  } else {
    const double s = (z - 2.0 * delta) / delta;
    b.value = psi * (0.5 * (s * s - 1.0) - std::log(delta));
    b.d1 = -psi * s / delta;  // dB/dg = -dB/dz
    b.d2 = psi / (delta * delta);
  }
  return b;
}

inline double rlb_value(double g, const RlbState& s) {
  return relaxed_barrier(g, s.psi, s.delta).value;
}

/// Gauss-Newton contributions of sum_i B(g_i) to the stage derivatives.
inline void rlb_derivatives(const Vector& g, const Matrix& gx, const Matrix& gu,
                            const RlbState& s, StageCostDerivatives& out) {
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const BarrierValue b = relaxed_barrier(g(i), s.psi, s.delta);
    const auto hx = gx.row(i);
    const auto hu = gu.row(i);
    out.lx += b.d1 * hx.transpose();
    out.lu += b.d1 * hu.transpose();
    out.lxx += b.d2 * hx.transpose() * hx;
    out.luu += b.d2 * hu.transpose() * hu;
    out.lux += b.d2 * hu.transpose() * hx;
  }
}

/// psi <- omega1 psi;  delta <- max(delta_min, omega2 delta).
inline void update_rlb_params(RlbState& s) {
  s.psi *= s.omega1;
  s.delta = std::max(s.delta_min, s.omega2 * s.delta);
}

/// J plus the relaxed barrier on every stage and terminal row.
class RlbObjective final : public CostModel {
 public:
  RlbObjective(const CostModel& base, const ConstraintSet& cons, const RlbState& state)
      : base_(&base), cons_(&cons), state_(&state) {}

  double running(const Vector& x, const Vector& u, int k) const override {
    double v = base_->running(x, u, k);
    if (cons_->stage_dim() == 0) return v;
    const Vector g = cons_->evaluate(x, u, k);
    for (Eigen::Index i = 0; i < g.size(); ++i) v += rlb_value(g(i), *state_);
    return v;
  }
  double terminal(const Vector& x) const override {
    double v = base_->terminal(x);
    if (cons_->terminal_dim() == 0) return v;
    const Vector g = cons_->evaluate_terminal(x);
    for (Eigen::Index i = 0; i < g.size(); ++i) v += rlb_value(g(i), *state_);
    return v;
  }
  void running_derivatives(const Vector& x, const Vector& u, int k,
                           StageCostDerivatives& out) const override {
    base_->running_derivatives(x, u, k, out);
    if (cons_->stage_dim() == 0) return;
    Matrix gx, gu;
    cons_->jacobians(x, u, k, gx, gu);
    rlb_derivatives(cons_->evaluate(x, u, k), gx, gu, *state_, out);
  }
  void terminal_derivatives(const Vector& x,
                            TerminalCostDerivatives& out) const override {
    base_->terminal_derivatives(x, out);
    if (cons_->terminal_dim() == 0) return;
    Matrix gx;
    cons_->terminal_jacobian(x, gx);
    StageCostDerivatives tmp;
    tmp.set_zero(static_cast<int>(x.size()), 0);
    tmp.lx = out.lx;
    tmp.lxx = out.lxx;
    rlb_derivatives(cons_->evaluate_terminal(x), gx, Matrix::Zero(gx.rows(), 0),
                    *state_, tmp);
    out.lx = tmp.lx;
    out.lxx = tmp.lxx;
  }

 private:
  const CostModel* base_;
  const ConstraintSet* cons_;
  const RlbState* state_;
};

struct RlbSolveOutput {
  SolveResult result;
  ShootingStructure shoot;
  RlbState state;
  int outer_iterations = 0;
  int first_feasible_outer = -1;  // outer iteration whose solve first met tol
  std::vector<double> psi_history;
  std::vector<double> delta_history;
};

/**
 * @brief RLB-MDDP: inner MDDP to convergence on L2, then decay (psi, delta).
 *
 * Each inner solve gets the full MDDP iteration cap; an inner solve that
 * fails to converge ends the stage. Stops after an inner solve that converged with max violation <= tol and
 * psi <= psi_stop.
 */
inline RlbSolveOutput solve_rlb(const ProblemDefinition& problem, Trajectory warm,
                                ShootingStructure shoot, const RlbConfig& cfg,
                                const MddpConfig& mddp, const LineSearchConfig& ls,
                                const RegState& reg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RlbSolveOutput out;
  out.state = RlbState::initial(cfg);
  RlbObjective objective(*problem.cost, problem.constraints, out.state);
  MddpSolver solver(problem, objective, std::move(warm), std::move(shoot), mddp, ls, reg);

  StepOutcome last = StepOutcome::Accepted;
  bool done = false;
  bool aborted = false;
  for (int outer = 1; outer <= cfg.max_outer && !aborted; ++outer) {
    out.outer_iterations = outer;
    out.psi_history.push_back(out.state.psi);
    out.delta_history.push_back(out.state.delta);
    solver.refresh();
    bool inner_converged = false;
    for (int it = 0; it < mddp.max_iter; ++it) {
      IterationRecord rec;
      try {
        last = solver.step(rec);
      } catch (const NumericalError&) {
        last = StepOutcome::NumericalError;
        aborted = true;
        break;
      }
      rec.stage = "rlb";
      rec.outer = outer;
      rec.psi = out.state.psi;
      rec.delta = out.state.delta;
      out.result.iterations.push_back(rec);
      if (last == StepOutcome::Converged) {
        inner_converged = true;
        break;
      }
      if (last == StepOutcome::RegularizationCapped) {
        aborted = true;
        break;
      }
    }
    if (!inner_converged) break;
    const double violation = max_violation(solver.trajectory(), problem.constraints);
    if (violation <= cfg.tol && out.first_feasible_outer < 0) {
      out.first_feasible_outer = outer;
    }
    if (violation <= cfg.tol && out.state.psi <= cfg.psi_stop) {
      done = true;
      break;
    }
    update_rlb_params(out.state);
    // Fresh regularization for the new barrier subproblem.
    solver.regularization().mu = reg.mu;
  }

  out.result.status = done ? SolveStatus::Converged
                           : (aborted ? status_from(last, false) : SolveStatus::MaxIterations);
  out.result.trajectory = solver.trajectory();
  out.shoot = solver.shooting();
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hmddp

#endif  // HMDDP_RLB_STAGE_HPP
