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
#ifndef HMDDP_CLI_RUNNER_HPP
#define HMDDP_CLI_RUNNER_HPP

#include "hmddp/cli/experiment.hpp"
#include "hmddp/cli/manifest.hpp"
#include "hmddp/hybrid.hpp"
#include "hmddp/systems/derivative_check.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hmddp::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2 };

enum class Pipeline { Hmddp, AlOnly, MddpOnly };

inline std::optional<Pipeline> parse_pipeline(const std::string& s) {
  if (s == "hmddp") return Pipeline::Hmddp;
  if (s == "al-only") return Pipeline::AlOnly;
  if (s == "mddp-only") return Pipeline::MddpOnly;
  return std::nullopt;
}

inline const char* to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Hmddp: return "hmddp";
    case Pipeline::AlOnly: return "al-only";
    case Pipeline::MddpOnly: return "mddp-only";
  }
  return "?";
}

inline HmddpResult run_pipeline(const Experiment& e, Pipeline p) {
  switch (p) {
    case Pipeline::Hmddp: return solve(e.problem, e.config);
    case Pipeline::AlOnly: return solve_al_only(e.problem, e.config);
    case Pipeline::MddpOnly: return solve_mddp_only(e.problem, e.config);
  }
  return {};
}

/// 0 iff Converged, else 2.
inline int exit_code(const HmddpResult& r) {
  return r.result.status == SolveStatus::Converged ? kExitOk : kExitSolver;
}

/// `k,t,x0..x{n-1},u0..u{m-1}`; the terminal row leaves the control columns empty.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.state_dim(), m = traj.control_dim(), N = traj.horizon();
  os << "k,t";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << '\n';
  for (int k = 0; k <= N; ++k) {
    os << k << ',' << detail::format_double(k * traj.dt);
    for (int i = 0; i < n; ++i) os << ',' << detail::format_double(traj.states[k](i));
    for (int i = 0; i < m; ++i) {
      os << ',';
      if (k < N) os << detail::format_double(traj.controls[k](i));
    }
    os << '\n';
  }
}

/// One row per step: K_k flattened row-major as K{i}_{j}.
inline void write_gains_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.state_dim(), m = traj.control_dim();
  os << "k";
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) os << ",K" << i << '_' << j;
  os << '\n';
  for (int k = 0; k < traj.horizon(); ++k) {
    os << k;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) os << ',' << detail::format_double(traj.gains[k](i, j));
    os << '\n';
  }
}

inline nlohmann::ordered_json to_json(const IterationRecord& r) {
  nlohmann::ordered_json j;
  j["stage"] = r.stage;
  j["iter"] = r.iter;
  j["outer"] = r.outer;
  j["cost"] = r.cost;
  j["merit"] = r.merit;
  j["max_violation"] = r.max_violation;
  j["defect_norm"] = r.defect_norm;
  j["alpha"] = r.alpha;
  j["ratio"] = r.ratio;
  j["mu_V"] = r.mu_V;
  j["psi"] = r.psi;
  j["delta"] = r.delta;
  j["lambda_max"] = r.lambda_max;
  j["penalty"] = r.penalty;
  j["accepted"] = r.accepted;
  j["converged"] = r.converged;
  return j;
}

inline void write_convergence_jsonl(std::ostream& os, const std::vector<IterationRecord>& log) {
  for (const auto& r : log) os << to_json(r).dump() << '\n';
}

inline nlohmann::ordered_json summary_json(const Experiment& e, Pipeline p,
                                           const HmddpResult& r) {
  nlohmann::ordered_json j;
  j["manifest_hash"] = e.manifest_hash;
  j["system"] = e.system;
  j["pipeline"] = to_string(p);
  j["seed"] = e.seed;
  j["status"] = to_string(r.result.status);
  j["cost"] = total_cost(r.result.trajectory, *e.problem.cost);
  j["max_violation"] = e.problem.constraints.empty()
                           ? 0.0
                           : max_violation(r.result.trajectory, e.problem.constraints);
  j["defect_norm"] = r.shoot.defect_norm();
  j["defects_closed"] = r.defects_closed;
  j["iterations"] = r.result.iterations.size();
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage},
                      {"status", to_string(s.status)},
                      {"iterations", s.iterations},
                      {"outer_iterations", s.outer_iterations},
                      {"seconds", s.seconds}});
  }
  j["stages"] = stages;
  j["rlb_first_feasible_outer"] = r.rlb_first_feasible_outer;
  j["al_penalty_history"] = r.al_penalty_history;
  j["al_lambda_min_history"] = r.al_lambda_min_history;
  j["rlb_psi_history"] = r.rlb_psi_history;
  j["rlb_delta_history"] = r.rlb_delta_history;
  j["solve_seconds"] = r.result.solve_seconds;
  return j;
}

/// Writes trajectory.csv, gains.csv, convergence.jsonl and summary.json into `dir`.
inline void write_outputs(const std::filesystem::path& dir, const Experiment& e, Pipeline p,
                          const HmddpResult& r) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("trajectory.csv");
    write_trajectory_csv(os, r.result.trajectory);
  }
  {
    auto os = open("gains.csv");
    write_gains_csv(os, r.result.trajectory);
  }
  {
    auto os = open("convergence.jsonl");
    write_convergence_jsonl(os, r.result.iterations);
  }
  {
    auto os = open("summary.json");
    os << summary_json(e, p, r).dump(2) << '\n';
  }
}

struct RunRequest {
  std::string manifest;
  Pipeline pipeline = Pipeline::Hmddp;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<int> seed;
};

inline Manifest load_manifest(const std::string& path, const std::vector<std::string>& overrides,
                              std::optional<int> seed) {
  Manifest m = Manifest::load(path);
  for (const auto& o : overrides) m.apply_override(o);
  if (seed) m.apply_override("problem.seed=" + std::to_string(*seed));
  return m;
}

/// Loads, solves and writes outputs; returns the process exit code.
inline int run_command(const RunRequest& req, std::ostream& out, std::ostream& err,
                       HmddpResult* result = nullptr) {
  Experiment e;
  HmddpResult r;
  try {
    e = build_experiment(load_manifest(req.manifest, req.overrides, req.seed));
    r = run_pipeline(e, req.pipeline);
  } catch (const ManifestError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const ProblemError& ex) {
    err << "error: " << req.manifest << ":0: " << ex.what() << '\n';
    return kExitConfig;
  }
  try {
    write_outputs(req.out_dir, e, req.pipeline, r);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  }
  const double viol = e.problem.constraints.empty()
                          ? 0.0
                          : max_violation(r.result.trajectory, e.problem.constraints);
  out << e.system << ' ' << to_string(req.pipeline) << ": " << to_string(r.result.status)
      << ", " << r.result.iterations.size() << " iterations, cost "
      << total_cost(r.result.trajectory, *e.problem.cost) << ", max violation " << viol
      << ", defect " << r.shoot.defect_norm() << '\n';
  if (result) *result = r;
  return exit_code(r);
}

/// Max abs difference between converged MDDP gains and the Riccati oracle.
inline double riccati_gap(const Experiment& e) {
  const HmddpResult r = solve_mddp_only(e.problem, e.config);
  double gap = 0.0;
  for (std::size_t k = 0; k < e.riccati->gains.size(); ++k) {
    gap = std::max(gap, (r.result.trajectory.gains[k] - e.riccati->gains[k]).cwiseAbs().maxCoeff());
  }
  return gap;
}

inline constexpr double kRiccatiGapTol = 1e-10;

/// Derivative checks for dynamics, cost and constraints; 0 iff every row passes.
inline int verify_command(const std::string& manifest, const std::vector<std::string>& overrides,
                          std::optional<int> seed, std::ostream& out, std::ostream& err) {
  Experiment e;
  try {
    e = build_experiment(load_manifest(manifest, overrides, seed));
  } catch (const ManifestError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  }
  using systems::check_derivatives;
  std::vector<std::pair<std::string, std::vector<systems::DerivativeReport>>> groups;
  const unsigned s = static_cast<unsigned>(e.seed);
  groups.emplace_back("dynamics", check_derivatives(*e.problem.dynamics, e.box, e.verify_samples,
                                                    s, e.verify_tolerance));
  groups.emplace_back("cost", check_derivatives(*e.problem.cost, e.box, e.verify_samples, s + 1,
                                                e.verify_tolerance));
  if (!e.problem.constraints.empty()) {
    groups.emplace_back("constraints", check_derivatives(e.problem.constraints, e.box,
                                                         e.verify_samples, s + 2,
                                                         e.verify_tolerance));
  }

  bool ok = true;
  out << e.system << ": " << e.verify_samples << " samples, tolerance " << e.verify_tolerance
      << '\n';
  out << std::left << std::setw(12) << "model" << std::setw(8) << "entry" << std::setw(14)
      << "max_error" << std::setw(7) << "result"
      << "worst\n";
  for (const auto& [model, reps] : groups) {
    for (const auto& rep : reps) {
      const auto& cons = e.problem.constraints;
      if (model == "constraints" &&
          (rep.quantity == "gN_x" ? cons.terminal_dim() : cons.stage_dim()) == 0) {
        continue;
      }
      ok = ok && rep.pass();
      out << std::setw(12) << model << std::setw(8) << rep.quantity << std::setw(14)
          << std::scientific << std::setprecision(3) << rep.max_error << std::defaultfloat
          << std::setw(7) << (rep.pass() ? "PASS" : "FAIL") << rep.worst << '\n';
    }
  }
  if (e.riccati) {
    const double gap = riccati_gap(e);
    const bool pass = gap <= kRiccatiGapTol;
    ok = ok && pass;
    out << "riccati gain gap " << std::scientific << std::setprecision(3) << gap
        << std::defaultfloat << " (tolerance " << kRiccatiGapTol << ") "
        << (pass ? "PASS" : "FAIL") << '\n';
  }
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kExitOk : kExitSolver;
}

}  // namespace hmddp::cli

#endif  // HMDDP_CLI_RUNNER_HPP
