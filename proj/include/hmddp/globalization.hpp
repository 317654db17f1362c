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
#ifndef HMDDP_GLOBALIZATION_HPP
#define HMDDP_GLOBALIZATION_HPP

#include "hmddp/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace hmddp {

/// Backtracking schedule and acceptance interval for the reduction ratio.
struct LineSearchConfig {
  double alpha0 = 1.0;
  double factor = 0.5;
  int trials = 11;           // 1, 1/2, ..., 2^-10
  double defect_weight = 1e3;
  double r_lo = 1e-4;
  double r_hi = 10.0;

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ProblemError("linesearch: alpha0 must be in (0,1]");
    if (!(factor > 0.0 && factor < 1.0)) throw ProblemError("linesearch: factor must be in (0,1)");
    if (trials < 1) throw ProblemError("linesearch: trials must be >= 1");
    if (!(defect_weight >= 0.0)) throw ProblemError("linesearch: defect weight must be >= 0");
    if (!(r_lo < r_hi)) throw ProblemError("linesearch: r_lo must be < r_hi");
  }

  std::vector<double> schedule() const {
    std::vector<double> alphas;
    alphas.reserve(trials);
    double a = alpha0;
    for (int i = 0; i < trials; ++i, a *= factor) alphas.push_back(a);
    return alphas;
  }

  bool accepts(double r) const { return r >= r_lo && r <= r_hi; }
};

/// State-value Hessian regularization mu_V with its growth law.
struct RegState {
  double mu = 0.0;
  double mu0 = 1e-6;
  double sigma = 10.0;
  double mu_max = 1e10;

  void validate() const {
    if (!(mu0 > 0.0)) throw ProblemError("reg: mu0 must be positive");
    if (!(sigma > 1.0)) throw ProblemError("reg: sigma must be > 1");
    if (!(mu_max >= mu0)) throw ProblemError("reg: mu_max must be >= mu0");
    if (!(mu >= 0.0 && mu <= mu_max)) throw ProblemError("reg: mu must lie in [0, mu_max]");
  }
};

/// dV = a*dV1 + a^2/2*dV2 + w * sum_j d_j^T d_j
inline double expected_reduction(double alpha, double dV1, double dV2,
                                 double defect_sq, double w) {
  return alpha * dV1 + 0.5 * alpha * alpha * dV2 + w * defect_sq;
}

inline double expected_reduction(double alpha, double dV1, double dV2,
                                 const std::vector<Vector>& defects, double w) {
  double sq = 0.0;
  for (const auto& d : defects) sq += d.squaredNorm();
  return expected_reduction(alpha, dV1, dV2, sq, w);
}

/// Below this |dV| the model predicts no change; the step is a convergence signal.
inline constexpr double kNegligibleReduction = 1e-16;

/// r = (L_new - L_old) / dV, or nullopt when |dV| is negligible.
inline std::optional<double> reduction_ratio(double merit_new, double merit_old,
                                             double dV) {
  if (std::abs(dV) < kNegligibleReduction) return std::nullopt;
  return (merit_new - merit_old) / dV;
}

/**
 * @brief mu_V <- min(sigma * max(mu_V, mu_V0), mu_max).
 *
 * Returns false, leaving the state untouched, when mu_V already sits at the cap.
 */
inline bool bump_regularization(RegState& reg) {
  if (reg.mu >= reg.mu_max) return false;
  reg.mu = std::min(reg.sigma * std::max(reg.mu, reg.mu0), reg.mu_max);
  return true;
}

/// mu_V <- mu_V / sigma, snapping to zero once it drops below mu_V0.
inline void decay_regularization(RegState& reg) {
  if (reg.mu <= 0.0) {
    reg.mu = 0.0;
    return;
  }
  const double next = reg.mu / reg.sigma;
  reg.mu = next < reg.mu0 * (1.0 - 1e-12) ? 0.0 : next;
}

struct LineSearchOutcome {
  enum class Kind { Accepted, Failed, Converged };
  Kind kind = Kind::Failed;
  double alpha = 0.0;
  double ratio = 0.0;
  double merit = 0.0;
  double expected = 0.0;
  int trials = 0;
};

/**
 * @brief Backtracking search over the defect-augmented merit model.
 *
 * `trial(alpha)` runs a forward pass at the given step and returns the new
 * merit, or nullopt when the rollout diverged (a rejected trial). The first
 * alpha whose ratio lands inside [r_lo, r_hi] is accepted; the callable is
 * expected to keep the candidate of the most recent call.
 */
template <class TrialFn>
LineSearchOutcome line_search(const LineSearchConfig& cfg, double dV1, double dV2,
                              double defect_sq, double merit_old, TrialFn&& trial) {
  LineSearchOutcome out;
  for (double alpha : cfg.schedule()) {
    const double dV = expected_reduction(alpha, dV1, dV2, defect_sq, cfg.defect_weight);
    if (std::abs(dV) < kNegligibleReduction) {
      out.kind = LineSearchOutcome::Kind::Converged;
      out.alpha = alpha;
      out.expected = dV;
      out.merit = merit_old;
      return out;
    }
    ++out.trials;
    const std::optional<double> merit_new = trial(alpha);
    if (!merit_new || !std::isfinite(*merit_new)) continue;
    const double r = (*merit_new - merit_old) / dV;
    if (cfg.accepts(r)) {
      out.kind = LineSearchOutcome::Kind::Accepted;
      out.alpha = alpha;
      out.ratio = r;
      out.merit = *merit_new;
      out.expected = dV;
      return out;
    }
  }
  out.kind = LineSearchOutcome::Kind::Failed;
  return out;
}

}  // namespace hmddp

#endif  // HMDDP_GLOBALIZATION_HPP
