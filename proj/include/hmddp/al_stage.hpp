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
#ifndef HMDDP_AL_STAGE_HPP
#define HMDDP_AL_STAGE_HPP

#include "hmddp/core.hpp"
#include "hmddp/mddp.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

namespace hmddp {

struct AlConfig {
  double lambda0 = 0.0;
  double mu0 = 1.0;
  double phi = 10.0;
  double c_max = 1e-2;
  int max_outer = 30;
  bool require_inner_convergence = false;  // also demand the MDDP stop test

  void validate() const {
    if (!(lambda0 >= 0.0)) throw ProblemError("al: lambda0 must be >= 0");
    if (!(mu0 > 0.0)) throw ProblemError("al: mu0 must be positive");
    if (!(phi > 1.0)) throw ProblemError("al: phi must be > 1");
    if (!(c_max >= 0.0)) throw ProblemError("al: c_max must be >= 0");
    if (max_outer < 1) throw ProblemError("al: max_outer must be >= 1");
  }
};

/// Multipliers (per step plus terminal) and per-step penalty weights.
struct AlState {
  std::vector<Vector> lambda;
  Vector lambda_terminal;
  std::vector<double> mu;
  double mu_terminal = 1.0;
  double phi = 10.0;

  static AlState initial(const ConstraintSet& cons, int horizon, const AlConfig& cfg) {
    AlState s;
    s.lambda.assign(horizon, Vector::Constant(cons.stage_dim(), cfg.lambda0));
    s.lambda_terminal = Vector::Constant(cons.terminal_dim(), cfg.lambda0);
    s.mu.assign(horizon, cfg.mu0);
    s.mu_terminal = cfg.mu0;
    s.phi = cfg.phi;
    return s;
  }

  double lambda_max() const {
    double m = lambda_terminal.size() ? lambda_terminal.maxCoeff() : 0.0;
    for (const auto& l : lambda) {
      if (l.size()) m = std::max(m, l.maxCoeff());
    }
    return m;
  }
  double lambda_min() const {
    double m = lambda_terminal.size() ? lambda_terminal.minCoeff() : 0.0;
    for (const auto& l : lambda) {
      if (l.size()) m = std::min(m, l.minCoeff());
    }
    return m;
  }
  double penalty() const { return mu.empty() ? mu_terminal : mu.front(); }
};

/// Penalty value and its Gauss-Newton contributions for one step.
struct AlTerms {
  double penalty = 0.0;
  Vector lx, lu;
  Matrix lxx, luu, lux;
};

/**
 * @brief h = max(0, g); value l^T h + mu/2 |h|^2 and its linearized derivatives.
 *
 * A row is active iff g > 0 strictly; inactive rows contribute nothing even
 * when their multiplier is positive.
 */
inline AlTerms al_cost_terms(const Vector& g, const Matrix& gx, const Matrix& gu,
                             const Vector& lambda, double mu) {
  const auto n = gx.cols();
  const auto m = gu.cols();
  AlTerms t;
  t.lx.setZero(n);
  t.lu.setZero(m);
  t.lxx.setZero(n, n);
  t.luu.setZero(m, m);
  t.lux.setZero(m, n);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!(g(i) > 0.0)) continue;
    const double h = g(i);
    t.penalty += lambda(i) * h + 0.5 * mu * h * h;
    const double w = lambda(i) + mu * h;
    const auto hx = gx.row(i);
    const auto hu = gu.row(i);
    t.lx += w * hx.transpose();
    t.lu += w * hu.transpose();
    t.lxx += mu * hx.transpose() * hx;
    t.luu += mu * hu.transpose() * hu;
    t.lux += mu * hu.transpose() * hx;
  }
  return t;
}

/// J plus the augmented-Lagrangian penalty at fixed multipliers.
class AlObjective final : public CostModel {
 public:
  AlObjective(const CostModel& base, const ConstraintSet& cons, const AlState& state)
      : base_(&base), cons_(&cons), state_(&state) {}

  double running(const Vector& x, const Vector& u, int k) const override {
    double v = base_->running(x, u, k);
    if (cons_->stage_dim() == 0) return v;
    const Vector g = cons_->evaluate(x, u, k);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g(i) > 0.0) v += state_->lambda[k](i) * g(i) + 0.5 * state_->mu[k] * g(i) * g(i);
    }
    return v;
  }
  double terminal(const Vector& x) const override {
    double v = base_->terminal(x);
    if (cons_->terminal_dim() == 0) return v;
    const Vector g = cons_->evaluate_terminal(x);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g(i) > 0.0) {
        v += state_->lambda_terminal(i) * g(i) + 0.5 * state_->mu_terminal * g(i) * g(i);
      }
    }
    return v;
  }
  void running_derivatives(const Vector& x, const Vector& u, int k,
                           StageCostDerivatives& out) const override {
    base_->running_derivatives(x, u, k, out);
    if (cons_->stage_dim() == 0) return;
    Matrix gx, gu;
    cons_->jacobians(x, u, k, gx, gu);
    const AlTerms t = al_cost_terms(cons_->evaluate(x, u, k), gx, gu,
                                    state_->lambda[k], state_->mu[k]);
    out.lx += t.lx;
    out.lu += t.lu;
    out.lxx += t.lxx;
    out.luu += t.luu;
    out.lux += t.lux;
  }
  void terminal_derivatives(const Vector& x,
                            TerminalCostDerivatives& out) const override {
    base_->terminal_derivatives(x, out);
    if (cons_->terminal_dim() == 0) return;
    Matrix gx;
    cons_->terminal_jacobian(x, gx);
    const Matrix gu = Matrix::Zero(gx.rows(), 0);
    const AlTerms t = al_cost_terms(cons_->evaluate_terminal(x), gx, gu,
                                    state_->lambda_terminal, state_->mu_terminal);
    out.lx += t.lx;
    out.lxx += t.lxx;
  }

 private:
  const CostModel* base_;
  const ConstraintSet* cons_;
  const AlState* state_;
};

/// lambda <- max(0, lambda + mu g); then mu <- phi mu.
inline void update_multipliers(AlState& al, const Trajectory& traj,
                               const ConstraintSet& cons) {
  if (cons.stage_dim() > 0) {
    for (int k = 0; k < traj.horizon(); ++k) {
      const Vector g = cons.evaluate(traj.states[k], traj.controls[k], k);
      al.lambda[k] = (al.lambda[k] + al.mu[k] * g).cwiseMax(0.0);
    }
  }
  if (cons.terminal_dim() > 0) {
    const Vector g = cons.evaluate_terminal(traj.states.back());
    al.lambda_terminal = (al.lambda_terminal + al.mu_terminal * g).cwiseMax(0.0);
  }
  for (double& mu : al.mu) mu *= al.phi;
  al.mu_terminal *= al.phi;
}

struct AlSolveOutput {
  SolveResult result;
  ShootingStructure shoot;
  AlState state;
  std::vector<double> penalty_history;  // mu after each update, starting with mu0
  std::vector<double> lambda_min_history;
};

/**
 * @brief AL-MDDP: one MDDP iteration on L1 per multiplier update.
 *
 * Multipliers are updated after an accepted (or converged) inner iteration;
 * a failed line search only raises mu_V. The loop ends once at least one
 * step has been accepted and the max violation is within c_max.
 */
inline AlSolveOutput solve_al(const ProblemDefinition& problem, Trajectory init,
                              ShootingStructure shoot, const AlConfig& cfg,
                              const MddpConfig& mddp, const LineSearchConfig& ls,
                              const RegState& reg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  AlSolveOutput out;
  out.state = AlState::initial(problem.constraints, init.horizon(), cfg);

  if (problem.constraints.empty()) {
    auto plain = solve_mddp(problem, *problem.cost, std::move(init), std::move(shoot),
                            mddp, ls, reg, "al");
    out.result = std::move(plain.result);
    out.shoot = std::move(plain.shoot);
    return out;
  }

  AlObjective objective(*problem.cost, problem.constraints, out.state);
  MddpSolver solver(problem, objective, std::move(init), std::move(shoot), mddp, ls, reg);
  out.penalty_history.push_back(out.state.penalty());
  out.lambda_min_history.push_back(out.state.lambda_min());

  double violation = max_violation(solver.trajectory(), problem.constraints);
  int accepted = 0;
  StepOutcome last = StepOutcome::Accepted;
  bool aborted = false;
  auto finished = [&] {
    return accepted > 0 && violation <= cfg.c_max &&
           (!cfg.require_inner_convergence || last == StepOutcome::Converged);
  };
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    if (finished()) break;
    IterationRecord rec;
    try {
      last = solver.step(rec);
    } catch (const NumericalError&) {
      last = StepOutcome::NumericalError;
      aborted = true;
      break;
    }
    rec.stage = "al";
    rec.outer = outer;
    if (last == StepOutcome::Accepted || last == StepOutcome::Converged) {
      ++accepted;
      update_multipliers(out.state, solver.trajectory(), problem.constraints);
      solver.refresh();
      out.penalty_history.push_back(out.state.penalty());
      out.lambda_min_history.push_back(out.state.lambda_min());
    }
    rec.lambda_max = out.state.lambda_max();
    rec.penalty = out.state.penalty();
    out.result.iterations.push_back(rec);
    violation = rec.max_violation;
    if (last == StepOutcome::RegularizationCapped) {
      aborted = true;
      break;
    }
  }

  const bool done = finished();
  out.result.status = done ? SolveStatus::Converged
                           : (aborted ? status_from(last, false) : SolveStatus::MaxIterations);
  out.result.trajectory = solver.trajectory();
  out.shoot = solver.shooting();
  out.result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hmddp

#endif  // HMDDP_AL_STAGE_HPP
