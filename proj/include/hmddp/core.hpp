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
#ifndef HMDDP_CORE_HPP
#define HMDDP_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmddp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a solver input is malformed (dimension mismatch, bad config).
class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a model produces NaN/Inf where a finite value is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_dim(const Vector& v, Eigen::Index dim, const char* what) {
  if (v.size() != dim) {
    throw ProblemError(std::string(what) + ": expected dimension " +
                       std::to_string(dim) + ", got " +
                       std::to_string(v.size()));
  }
}

/**
 * @brief State/control/gain sequences over a horizon of N steps.
 *
 * states has N+1 entries, controls and gains N. Gains are the m x n
 * feedback matrices of the last backward pass (zero before the first).
 */
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<Matrix> gains;
  double dt = 0.0;

  Trajectory() = default;
  Trajectory(int horizon, int n, int m, double step)
      : states(horizon + 1, Vector::Zero(n)),
        controls(horizon, Vector::Zero(m)),
        gains(horizon, Matrix::Zero(m, n)),
        dt(step) {}

  int horizon() const { return static_cast<int>(controls.size()); }
  int state_dim() const {
    return states.empty() ? 0 : static_cast<int>(states.front().size());
  }
  int control_dim() const {
    return controls.empty() ? 0 : static_cast<int>(controls.front().size());
  }

  void validate(int n, int m) const {
    if (controls.empty()) throw ProblemError("trajectory: horizon must be positive");
    if (states.size() != controls.size() + 1) {
      throw ProblemError("trajectory: states.size() must equal controls.size() + 1");
    }
    if (gains.size() != controls.size()) {
      throw ProblemError("trajectory: gains.size() must equal horizon");
    }
    for (const auto& x : states) require_dim(x, n, "trajectory state");
    for (const auto& u : controls) require_dim(u, m, "trajectory control");
    for (const auto& K : gains) {
      if (K.rows() != m || K.cols() != n) {
        throw ProblemError("trajectory: gain must be m x n");
      }
    }
  }
};

/// Discrete transition x+ = f(x, u) with its first-order sensitivities.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual Vector step(const Vector& x, const Vector& u) const = 0;
  virtual void jacobians(const Vector& x, const Vector& u, Matrix& fx,
                         Matrix& fu) const = 0;
};

struct StageCostDerivatives {
  Vector lx, lu;
  Matrix lxx, luu, lux;  // lxu is lux^T

  void set_zero(int n, int m) {
    lx.setZero(n);
    lu.setZero(m);
    lxx.setZero(n, n);
    luu.setZero(m, m);
    lux.setZero(m, n);
  }
};

struct TerminalCostDerivatives {
  Vector lx;
  Matrix lxx;
};

/**
 * @brief Running/terminal objective with derivatives up to second order.
 *
 * The backward pass only ever talks to this interface, so the augmented
 * objectives of the penalty stages implement it too.
 */
class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual double running(const Vector& x, const Vector& u, int k) const = 0;
  virtual double terminal(const Vector& x) const = 0;
  virtual void running_derivatives(const Vector& x, const Vector& u, int k,
                                   StageCostDerivatives& out) const = 0;
  virtual void terminal_derivatives(const Vector& x,
                                    TerminalCostDerivatives& out) const = 0;
};

/// l = |x - xg|_Q^2 + |u|_R^2,  lf = |x - xg|_Qf^2 (no 1/2 factor).
class QuadraticCost final : public CostModel {
 public:
  QuadraticCost(Matrix Q, Matrix R, Matrix Qf, Vector x_goal)
      : Q_(std::move(Q)), R_(std::move(R)), Qf_(std::move(Qf)),
        x_goal_(std::move(x_goal)) {
    const auto n = x_goal_.size();
    if (Q_.rows() != n || Q_.cols() != n || Qf_.rows() != n || Qf_.cols() != n ||
        R_.rows() != R_.cols()) {
      throw ProblemError("QuadraticCost: weight dimensions do not match goal");
    }
  }

  /// Diagonal weights q*I_n, r*I_m, qf*I_n.
  static QuadraticCost diagonal(int n, int m, double q, double r, double qf,
                                Vector x_goal) {
    return QuadraticCost(q * Matrix::Identity(n, n), r * Matrix::Identity(m, m),
                         qf * Matrix::Identity(n, n), std::move(x_goal));
  }

  double running(const Vector& x, const Vector& u, int) const override {
    const Vector e = x - x_goal_;
    return e.dot(Q_ * e) + u.dot(R_ * u);
  }
  double terminal(const Vector& x) const override {
    const Vector e = x - x_goal_;
    return e.dot(Qf_ * e);
  }
  void running_derivatives(const Vector& x, const Vector& u, int,
                           StageCostDerivatives& out) const override {
    const Vector e = x - x_goal_;
    out.lx = (Q_ + Q_.transpose()) * e;
    out.lu = (R_ + R_.transpose()) * u;
    out.lxx = Q_ + Q_.transpose();
    out.luu = R_ + R_.transpose();
    out.lux.setZero(u.size(), x.size());
  }
  void terminal_derivatives(const Vector& x,
                            TerminalCostDerivatives& out) const override {
    const Vector e = x - x_goal_;
    out.lx = (Qf_ + Qf_.transpose()) * e;
    out.lxx = Qf_ + Qf_.transpose();
  }

  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }
  const Matrix& Qf() const { return Qf_; }
  const Vector& goal() const { return x_goal_; }

 private:
  Matrix Q_, R_, Qf_;
  Vector x_goal_;
};

/// A block of inequality rows g(x, u) <= 0.
class Constraint {
 public:
  virtual ~Constraint() = default;
  virtual int dim() const = 0;
  virtual Vector evaluate(const Vector& x, const Vector& u) const = 0;
  virtual void jacobians(const Vector& x, const Vector& u, Matrix& gx,
                         Matrix& gu) const = 0;
  virtual std::string name() const = 0;
};

/// Bound on one state or control component, as up to two affine rows.
class BoundConstraint final : public Constraint {
 public:
  enum class Target { State, Control };

  static constexpr double kNone = std::numeric_limits<double>::infinity();

  BoundConstraint(Target target, int index, double lower, double upper,
                  int n, int m)
      : target_(target), index_(index), lower_(lower), upper_(upper), n_(n), m_(m) {
    if (!(lower < upper)) throw ProblemError("BoundConstraint: lower must be < upper");
    if (std::isfinite(upper_)) rows_.push_back(+1);
    if (std::isfinite(lower_)) rows_.push_back(-1);
    if (rows_.empty()) throw ProblemError("BoundConstraint: no finite bound");
  }

  int dim() const override { return static_cast<int>(rows_.size()); }

  Vector evaluate(const Vector& x, const Vector& u) const override {
    const double v = target_ == Target::State ? x(index_) : u(index_);
    Vector g(dim());
    for (int i = 0; i < dim(); ++i) g(i) = rows_[i] > 0 ? v - upper_ : lower_ - v;
    return g;
  }

  void jacobians(const Vector&, const Vector&, Matrix& gx,
                 Matrix& gu) const override {
    gx.setZero(dim(), n_);
    gu.setZero(dim(), m_);
    for (int i = 0; i < dim(); ++i) {
      if (target_ == Target::State) {
        gx(i, index_) = rows_[i];
      } else {
        gu(i, index_) = rows_[i];
      }
    }
  }

  std::string name() const override {
    return std::string(target_ == Target::State ? "x" : "u") + "[" +
           std::to_string(index_) + "] bound";
  }

 private:
  Target target_;
  int index_;
  double lower_, upper_;
  int n_, m_;
  std::vector<int> rows_;
};

/// Gx x + Gu u - c <= 0.
class LinearConstraint final : public Constraint {
 public:
  LinearConstraint(Matrix Gx, Matrix Gu, Vector c)
      : Gx_(std::move(Gx)), Gu_(std::move(Gu)), c_(std::move(c)) {
    if (Gx_.rows() != Gu_.rows() || Gx_.rows() != c_.size()) {
      throw ProblemError("LinearConstraint: row counts differ");
    }
  }
  int dim() const override { return static_cast<int>(c_.size()); }
  Vector evaluate(const Vector& x, const Vector& u) const override {
    return Gx_ * x + Gu_ * u - c_;
  }
  void jacobians(const Vector&, const Vector&, Matrix& gx,
                 Matrix& gu) const override {
    gx = Gx_;
    gu = Gu_;
  }
  std::string name() const override { return "linear"; }

 private:
  Matrix Gx_, Gu_;
  Vector c_;
};

/// r^2 - |(x_i, x_j) - c|^2 <= 0 (squared-distance form, smooth everywhere).
class CircleObstacle final : public Constraint {
 public:
  CircleObstacle(double cx, double cy, double radius, int ix, int iy, int n, int m)
      : cx_(cx), cy_(cy), r_(radius), ix_(ix), iy_(iy), n_(n), m_(m) {
    if (!(radius > 0)) throw ProblemError("CircleObstacle: radius must be positive");
  }
  int dim() const override { return 1; }
  Vector evaluate(const Vector& x, const Vector&) const override {
    const double dx = x(ix_) - cx_, dy = x(iy_) - cy_;
    return Vector::Constant(1, r_ * r_ - dx * dx - dy * dy);
  }
  void jacobians(const Vector& x, const Vector&, Matrix& gx,
                 Matrix& gu) const override {
    gx.setZero(1, n_);
    gu.setZero(1, m_);
    gx(0, ix_) = -2.0 * (x(ix_) - cx_);
    gx(0, iy_) = -2.0 * (x(iy_) - cy_);
  }
  std::string name() const override { return "obstacle"; }

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double radius() const { return r_; }

 private:
  double cx_, cy_, r_;
  int ix_, iy_, n_, m_;
};

/**
 * @brief Stage constraints (applied at k = 0..N-1) plus terminal constraints.
 *
 * Terminal rows are evaluated with a zero control; their g_u is ignored.
 */
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(int n, int m) : n_(n), m_(m) {}

  void add_stage(std::shared_ptr<const Constraint> c) {
    stage_dim_ += c->dim();
    stage_.push_back(std::move(c));
  }
  void add_terminal(std::shared_ptr<const Constraint> c) {
    terminal_dim_ += c->dim();
    terminal_.push_back(std::move(c));
  }

  bool empty() const { return stage_.empty() && terminal_.empty(); }
  int stage_dim(int /*k*/ = 0) const { return stage_dim_; }
  int terminal_dim() const { return terminal_dim_; }
  int state_dim() const { return n_; }
  int control_dim() const { return m_; }
  const std::vector<std::shared_ptr<const Constraint>>& stage() const { return stage_; }
  const std::vector<std::shared_ptr<const Constraint>>& terminal() const {
    return terminal_;
  }

  Vector evaluate(const Vector& x, const Vector& u, int /*k*/) const {
    return stack(stage_, stage_dim_, x, u);
  }
  void jacobians(const Vector& x, const Vector& u, int /*k*/, Matrix& gx,
                 Matrix& gu) const {
    stack_jacobians(stage_, stage_dim_, x, u, gx, gu);
  }
  Vector evaluate_terminal(const Vector& x) const {
    return stack(terminal_, terminal_dim_, x, Vector::Zero(m_));
  }
  void terminal_jacobian(const Vector& x, Matrix& gx) const {
    Matrix gu;
    stack_jacobians(terminal_, terminal_dim_, x, Vector::Zero(m_), gx, gu);
  }

 private:
  static Vector stack(const std::vector<std::shared_ptr<const Constraint>>& list,
                      int total, const Vector& x, const Vector& u) {
    Vector g(total);
    int row = 0;
    for (const auto& c : list) {
      g.segment(row, c->dim()) = c->evaluate(x, u);
      row += c->dim();
    }
    return g;
  }
  void stack_jacobians(const std::vector<std::shared_ptr<const Constraint>>& list,
                       int total, const Vector& x, const Vector& u, Matrix& gx,
                       Matrix& gu) const {
    gx.setZero(total, n_);
    gu.setZero(total, m_);
    int row = 0;
    Matrix bx, bu;
    for (const auto& c : list) {
      c->jacobians(x, u, bx, bu);
      gx.middleRows(row, c->dim()) = bx;
      gu.middleRows(row, c->dim()) = bu;
      row += c->dim();
    }
  }

  int n_ = 0, m_ = 0;
  int stage_dim_ = 0, terminal_dim_ = 0;
  std::vector<std::shared_ptr<const Constraint>> stage_;
  std::vector<std::shared_ptr<const Constraint>> terminal_;
};

struct ProblemDefinition {
  std::shared_ptr<const DynamicsModel> dynamics;
  std::shared_ptr<const CostModel> cost;
  ConstraintSet constraints;
  Vector x_init;
  Vector x_goal;
  int horizon = 0;
  double dt = 0.0;
  int segments = 1;

  int state_dim() const { return dynamics->state_dim(); }
  int control_dim() const { return dynamics->control_dim(); }

  void validate() const {
    if (!dynamics || !cost) throw ProblemError("problem: dynamics and cost are required");
    if (horizon <= 0) throw ProblemError("problem: horizon must be positive");
    if (segments < 1 || segments > horizon) {
      throw ProblemError("problem: segment count must satisfy 1 <= M <= N");
    }
    require_dim(x_init, state_dim(), "problem x_init");
    require_dim(x_goal, state_dim(), "problem x_goal");
    if (!all_finite(x_init) || !all_finite(x_goal)) {
      throw ProblemError("problem: x_init/x_goal must be finite");
    }
    if (!constraints.empty() && (constraints.state_dim() != state_dim() ||
                                 constraints.control_dim() != control_dim())) {
      throw ProblemError("problem: constraint set dimensions do not match dynamics");
    }
  }
};

enum class SolveStatus {
  Converged,
  MaxIterations,
  LineSearchFailed,
  RegularizationCapped,
  NumericalError
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::LineSearchFailed: return "LineSearchFailed";
    case SolveStatus::RegularizationCapped: return "RegularizationCapped";
    case SolveStatus::NumericalError: return "NumericalError";
  }
  return "Unknown";
}

/// One solver iteration as seen by the convergence log.
struct IterationRecord {
  std::string stage;
  int iter = 0;         // index within the solve, monotone
  int outer = 0;        // outer iteration of the penalty stage (0 for plain MDDP)
  double cost = 0.0;    // original objective J of the nominal after this iteration
  double merit = 0.0;   // stage objective (J, L1 or L2)
  double max_violation = 0.0;
  double defect_norm = 0.0;
  double alpha = 0.0;   // accepted step, 0 when the line search failed
  double ratio = 0.0;   // reduction ratio of the accepted trial
  double mu_V = 0.0;    // regularization used by this iteration's backward pass
  double psi = 0.0, delta = 0.0;
  double lambda_max = 0.0, penalty = 0.0;
  bool accepted = false;
  bool converged = false;
};

struct SolveResult {
  Trajectory trajectory;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<IterationRecord> iterations;
  double solve_seconds = 0.0;
  std::vector<double> stage_seconds;
};

inline double total_cost(const Trajectory& traj, const CostModel& cost) {
  double J = 0.0;
  for (int k = 0; k < traj.horizon(); ++k) {
    J += cost.running(traj.states[k], traj.controls[k], k);
  }
  J += cost.terminal(traj.states.back());
  if (!std::isfinite(J)) throw NumericalError("total_cost: non-finite cost");
  return J;
}

/// max_k,i g_i(x_k, u_k) over stage and terminal rows; 0 for an empty set.
inline double max_violation(const Trajectory& traj, const ConstraintSet& cons) {
  if (cons.empty()) return 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  if (cons.stage_dim() > 0) {
    for (int k = 0; k < traj.horizon(); ++k) {
      const Vector g = cons.evaluate(traj.states[k], traj.controls[k], k);
      worst = std::max(worst, g.maxCoeff());
    }
  }
  if (cons.terminal_dim() > 0) {
    worst = std::max(worst, cons.evaluate_terminal(traj.states.back()).maxCoeff());
  }
  if (std::isnan(worst)) throw NumericalError("max_violation: non-finite constraint");
  return worst;
}

}  // namespace hmddp

#endif  // HMDDP_CORE_HPP
