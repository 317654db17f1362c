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
#include "hmddp/cli/runner.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hmddp;
using namespace hmddp::cli;
namespace fs = std::filesystem;

namespace {

std::string manifest_path(const std::string& name) {
  return std::string(HMDDP_MANIFEST_DIR) + "/" + name + ".manifest";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hmddp_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kSmall = R"(# comment line
[problem]
system = "lqr"   # trailing comment
horizon = 10
dt = 0.1

[lqr]
n = 2
m = 1

[al]
phi = 5
)";

}  // namespace

TEST(Manifest, SectionsAndComments) {
  const Manifest m = Manifest::parse(kSmall);
  EXPECT_EQ(m.string("problem.system"), "lqr");
  EXPECT_EQ(m.integer("problem.horizon", 0), 10);
  EXPECT_DOUBLE_EQ(m.number("al.phi", 0.0), 5.0);
  EXPECT_FALSE(m.has("rlb.tol"));
  EXPECT_DOUBLE_EQ(m.number("rlb.tol", 3.0), 3.0);
}

TEST(Manifest, MultiLineArrays) {
  const Manifest m = Manifest::parse(
      "[linear]\nA = [[1, 2],  # first row\n     [3, 4]]\nu_min = [-1.5]\n");
  const auto rows = m.rows("linear.A");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], 3.0);
  EXPECT_EQ(m.vector("linear.u_min"), std::vector<double>{-1.5});
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      Manifest::parse(text, "m.txt");
    } catch (const ManifestError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("[problem]\ndt = 0.1\ndt = 0.2\n").rfind("m.txt:3:", 0), 0u);
  EXPECT_EQ(message("\n[problem]\nbogus = 1\n").rfind("m.txt:3:", 0), 0u);
  EXPECT_EQ(message("[problem]\nhorizon = \"ten\"\n").rfind("m.txt:2:", 0), 0u);
  EXPECT_EQ(message("[problem]\nhorizon = 2.5\n").rfind("m.txt:2:", 0), 0u);
  EXPECT_EQ(message("[linear]\nA = [[1, 2],\n [3, 4]\n").rfind("m.txt:2:", 0), 0u);
  EXPECT_EQ(message("[problem\n").rfind("m.txt:1:", 0), 0u);
  EXPECT_EQ(message("[problem]\nhorizon 5\n").rfind("m.txt:2:", 0), 0u);
}

TEST(Manifest, OverridesRequireSchemaKeys) {
  Manifest m = Manifest::parse(kSmall);
  m.apply_override("al.phi=20");
  EXPECT_DOUBLE_EQ(m.number("al.phi", 0.0), 20.0);
  m.apply_override("rlb.tol=1e-9");
  EXPECT_DOUBLE_EQ(m.number("rlb.tol", 0.0), 1e-9);
  EXPECT_THROW(m.apply_override("al.nonsense=1"), ManifestError);
  EXPECT_THROW(m.apply_override("al.phi"), ManifestError);
  EXPECT_THROW(m.apply_override("problem.horizon=abc"), ManifestError);
}

TEST(Manifest, HashTracksResolvedContentOnly) {
  const Manifest a = Manifest::parse(kSmall);
  const Manifest b = Manifest::parse(
      "[lqr]\nm=1\nn   =   2\n\n# reordered\n[al]\nphi=5.0\n[problem]\ndt=0.1\nhorizon=10\n"
      "system=\"lqr\"\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  Manifest c = a;
  c.apply_override("al.phi=6");
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Experiment, ShippedManifestsBuild) {
  for (const char* name :
       {"cartpole", "car2d", "quadrotor", "lqr", "custom-linear", "custom-linear-corrupted"}) {
    const Experiment e = build_experiment(Manifest::load(manifest_path(name)));
    EXPECT_FALSE(e.system.empty()) << name;
    EXPECT_NO_THROW(e.problem.validate()) << name;
    EXPECT_EQ(e.manifest_hash.size(), 16u) << name;
  }
  const Experiment lqr = build_experiment(Manifest::load(manifest_path("lqr")));
  ASSERT_TRUE(lqr.riccati.has_value());
  EXPECT_EQ(lqr.riccati->gains.size(), 50u);
}

TEST(Experiment, OverridesReachSolverConfig) {
  Manifest m = Manifest::load(manifest_path("cartpole"));
  m.apply_override("al.phi=7");
  m.apply_override("rlb.omega1=0.3");
  m.apply_override("linesearch.defect_weight=500");
  const Experiment e = build_experiment(m);
  EXPECT_DOUBLE_EQ(e.config.al.phi, 7.0);
  EXPECT_DOUBLE_EQ(e.config.rlb.omega1, 0.3);
  EXPECT_DOUBLE_EQ(e.config.ls.defect_weight, 500.0);
}

TEST(Experiment, RejectsUnknownSystem) {
  Manifest m = Manifest::parse("[problem]\nsystem = \"pendulum\"\n");
  EXPECT_THROW(build_experiment(m), ManifestError);
}

TEST(Pipeline, NamesRoundTrip) {
  for (const char* s : {"hmddp", "al-only", "mddp-only"}) {
    const auto p = parse_pipeline(s);
    ASSERT_TRUE(p.has_value());
    EXPECT_STREQ(to_string(*p), s);
  }
  EXPECT_FALSE(parse_pipeline("ilqr").has_value());
}

TEST(RunCommand, WritesOutputsDeterministically) {
  const fs::path a = scratch("a"), b = scratch("b");
  std::ostringstream out, err;
  RunRequest req;
  req.manifest = manifest_path("custom-linear");
  req.out_dir = a;
  ASSERT_EQ(run_command(req, out, err), kExitOk) << err.str();
  req.out_dir = b;
  ASSERT_EQ(run_command(req, out, err), kExitOk) << err.str();
  for (const char* f : {"trajectory.csv", "gains.csv", "convergence.jsonl", "summary.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_EQ(slurp(a / "trajectory.csv"), slurp(b / "trajectory.csv"));
  EXPECT_EQ(slurp(a / "gains.csv"), slurp(b / "gains.csv"));
  EXPECT_EQ(slurp(a / "convergence.jsonl"), slurp(b / "convergence.jsonl"));

  std::istringstream traj(slurp(a / "trajectory.csv"));
  std::string line;
  std::getline(traj, line);
  EXPECT_EQ(line, "k,t,x0,x1,u0");
  int rows = 0;
  std::string last;
  while (std::getline(traj, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 101);
  EXPECT_EQ(last.back(), ',');

  std::istringstream gains(slurp(a / "gains.csv"));
  std::getline(gains, line);
  EXPECT_EQ(line, "k,K0_0,K0_1");

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(summary["status"], "Converged");
  EXPECT_EQ(summary["pipeline"], "hmddp");
  EXPECT_EQ(summary["manifest_hash"].get<std::string>().size(), 16u);

  std::istringstream log(slurp(a / "convergence.jsonl"));
  int records = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("mu_V"));
    EXPECT_EQ(j["iter"], ++records);
  }
  EXPECT_EQ(records, summary["iterations"].get<int>());
}

TEST(RunCommand, SeedIsRecordedAndHashed) {
  const fs::path a = scratch("seed");
  std::ostringstream out, err;
  RunRequest req;
  req.manifest = manifest_path("custom-linear");
  req.out_dir = a;
  req.seed = 99;
  ASSERT_EQ(run_command(req, out, err), kExitOk);
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  EXPECT_EQ(summary["seed"], 99);
  EXPECT_NE(summary["manifest_hash"], build_experiment(Manifest::load(req.manifest)).manifest_hash);
}

TEST(RunCommand, ConfigErrorsExitOne) {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "broken.manifest");
    bad << "[problem]\nsystem = \"lqr\"\nhorizon = [1,\n";
  }
  std::ostringstream out, err;
  RunRequest req;
  req.manifest = (dir / "broken.manifest").string();
  req.out_dir = dir / "out";
  EXPECT_EQ(run_command(req, out, err), kExitConfig);
  EXPECT_NE(err.str().find("broken.manifest:3:"), std::string::npos);

  req.manifest = (dir / "missing.manifest").string();
  EXPECT_EQ(run_command(req, out, err), kExitConfig);

  req.manifest = manifest_path("lqr");
  req.overrides = {"lqr.q=1"};
  EXPECT_EQ(run_command(req, out, err), kExitConfig);
}

TEST(VerifyCommand, ExitCodes) {
  std::ostringstream out, err;
  EXPECT_EQ(verify_command(manifest_path("cartpole"), {}, std::nullopt, out, err), kExitOk);
  EXPECT_NE(out.str().find("PASS"), std::string::npos);

  std::ostringstream bad;
  EXPECT_EQ(verify_command(manifest_path("custom-linear-corrupted"), {}, std::nullopt, bad, err),
            kExitSolver);
  EXPECT_NE(bad.str().find("FAIL"), std::string::npos);
  EXPECT_NE(bad.str().find("entry (0,1)"), std::string::npos);

  std::ostringstream lqr;
  EXPECT_EQ(verify_command(manifest_path("lqr"), {}, std::nullopt, lqr, err), kExitOk);
  EXPECT_NE(lqr.str().find("riccati gain gap"), std::string::npos);
}
