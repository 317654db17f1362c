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
#ifndef HMDDP_SYSTEMS_DERIVATIVE_CHECK_HPP
#define HMDDP_SYSTEMS_DERIVATIVE_CHECK_HPP

#include "hmddp/core.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace hmddp::systems {

/// Central-difference Jacobian of f at z with step h_i = rel_step * (1 + |z_i|).
template <class F>
Matrix central_difference(F&& f, const Vector& z, double rel_step = 1e-6) {
  const Vector f0 = f(z);
  Matrix J(f0.size(), z.size());
  Vector zp = z, zm = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(z(i)));
    zp(i) = z(i) + h;
    zm(i) = z(i) - h;
    J.col(i) = (f(zp) - f(zm)) / (zp(i) - zm(i));
    zp(i) = zm(i) = z(i);
  }
  return J;
}

struct SampleBox {
  Vector x_lo, x_hi, u_lo, u_hi;
};

struct DerivativeReport {
  std::string quantity;   // e.g. "f_x", "l_uu"
  double max_error = 0.0; // |analytic - fd| / max(1, |fd|)
  std::string worst;      // "sample s, entry (i,j)"
  int samples = 0;
  double tolerance = 1e-5;
  bool pass() const { return max_error <= tolerance; }
};

namespace detail {

inline void accumulate(DerivativeReport& rep, const Matrix& analytic, const Matrix& fd,
                       int sample) {
  for (Eigen::Index i = 0; i < fd.rows(); ++i) {
    for (Eigen::Index j = 0; j < fd.cols(); ++j) {
      const double err = std::abs(analytic(i, j) - fd(i, j)) /
                         std::max(1.0, std::abs(fd(i, j)));
      if (!(err <= rep.max_error)) {
        rep.max_error = std::isnan(err) ? INFINITY : err;
        rep.worst = "sample " + std::to_string(sample) + ", entry (" +
                    std::to_string(i) + "," + std::to_string(j) + ")";
      }
    }
  }
}

inline Vector uniform(std::mt19937_64& rng, const Vector& lo, const Vector& hi) {
  Vector v(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    std::uniform_real_distribution<double> d(lo(i), hi(i));
    v(i) = d(rng);
  }
  return v;
}

inline std::vector<DerivativeReport> make_reports(std::initializer_list<const char*> names,
                                                  int samples, double tol) {
  std::vector<DerivativeReport> reps;
  for (const char* n : names) {
    DerivativeReport r;
    r.quantity = n;
    r.samples = samples;
    r.tolerance = tol;
    reps.push_back(r);
  }
  return reps;
}

}  // namespace detail

/// f_x, f_u of a discrete model against central differences of step().
inline std::vector<DerivativeReport> check_derivatives(const DynamicsModel& dyn,
                                                       const SampleBox& box, int samples,
                                                       unsigned seed, double tol = 1e-5) {
  std::mt19937_64 rng(seed);
  auto reps = detail::make_reports({"f_x", "f_u"}, samples, tol);
  Matrix fx, fu;
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::uniform(rng, box.x_lo, box.x_hi);
    const Vector u = detail::uniform(rng, box.u_lo, box.u_hi);
    dyn.jacobians(x, u, fx, fu);
    detail::accumulate(reps[0], fx,
                       central_difference([&](const Vector& z) { return dyn.step(z, u); }, x), s);
    detail::accumulate(reps[1], fu,
                       central_difference([&](const Vector& z) { return dyn.step(x, z); }, u), s);
  }
  return reps;
}

/// Gradients against differences of the values, Hessians against differences of the gradients.
inline std::vector<DerivativeReport> check_derivatives(const CostModel& cost,
                                                       const SampleBox& box, int samples,
                                                       unsigned seed, double tol = 1e-5) {
  std::mt19937_64 rng(seed);
  auto reps = detail::make_reports(
      {"l_x", "l_u", "l_xx", "l_uu", "l_ux", "lf_x", "lf_xx"}, samples, tol);
  StageCostDerivatives d;
  TerminalCostDerivatives t;
  auto scalar = [](double v) { return Vector::Constant(1, v); };
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::uniform(rng, box.x_lo, box.x_hi);
    const Vector u = detail::uniform(rng, box.u_lo, box.u_hi);
    const int k = s;
    cost.running_derivatives(x, u, k, d);
    auto grad_x = [&](const Vector& z) {
      StageCostDerivatives e;
      cost.running_derivatives(z, u, k, e);
      return Vector(e.lx);
    };
    auto grad_u_of_x = [&](const Vector& z) {
      StageCostDerivatives e;
      cost.running_derivatives(z, u, k, e);
      return Vector(e.lu);
    };
    auto grad_u = [&](const Vector& z) {
      StageCostDerivatives e;
      cost.running_derivatives(x, z, k, e);
      return Vector(e.lu);
    };
    detail::accumulate(reps[0], d.lx.transpose(),
                       central_difference([&](const Vector& z) { return scalar(cost.running(z, u, k)); }, x), s);
    detail::accumulate(reps[1], d.lu.transpose(),
                       central_difference([&](const Vector& z) { return scalar(cost.running(x, z, k)); }, u), s);
    detail::accumulate(reps[2], d.lxx, central_difference(grad_x, x), s);
    detail::accumulate(reps[3], d.luu, central_difference(grad_u, u), s);
    detail::accumulate(reps[4], d.lux, central_difference(grad_u_of_x, x), s);

    cost.terminal_derivatives(x, t);
    detail::accumulate(reps[5], t.lx.transpose(),
                       central_difference([&](const Vector& z) { return scalar(cost.terminal(z)); }, x), s);
    detail::accumulate(reps[6], t.lxx,
                       central_difference([&](const Vector& z) {
                         TerminalCostDerivatives e;
                         cost.terminal_derivatives(z, e);
                         return Vector(e.lx);
                       }, x), s);
  }
  return reps;
}

/// g_x, g_u of the stage rows and g_x of the terminal rows.
inline std::vector<DerivativeReport> check_derivatives(const ConstraintSet& cons,
                                                       const SampleBox& box, int samples,
                                                       unsigned seed, double tol = 1e-5) {
  std::mt19937_64 rng(seed);
  auto reps = detail::make_reports({"g_x", "g_u", "gN_x"}, samples, tol);
  Matrix gx, gu;
  for (int s = 0; s < samples; ++s) {
    const Vector x = detail::uniform(rng, box.x_lo, box.x_hi);
    const Vector u = detail::uniform(rng, box.u_lo, box.u_hi);
    if (cons.stage_dim() > 0) {
      cons.jacobians(x, u, s, gx, gu);
      detail::accumulate(reps[0], gx,
                         central_difference([&](const Vector& z) { return cons.evaluate(z, u, s); }, x), s);
      detail::accumulate(reps[1], gu,
                         central_difference([&](const Vector& z) { return cons.evaluate(x, z, s); }, u), s);
    }
    if (cons.terminal_dim() > 0) {
      cons.terminal_jacobian(x, gx);
      detail::accumulate(reps[2], gx,
                         central_difference([&](const Vector& z) { return cons.evaluate_terminal(z); }, x), s);
    }
  }
  return reps;
}

inline bool all_pass(const std::vector<DerivativeReport>& reps) {
  for (const auto& r : reps) {
    if (!r.pass()) return false;
  }
  return true;
}

}  // namespace hmddp::systems

#endif  // HMDDP_SYSTEMS_DERIVATIVE_CHECK_HPP
