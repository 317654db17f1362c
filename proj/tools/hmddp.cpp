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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  using namespace hmddp::cli;

  CLI::App app{"Hybrid multiple-shooting DDP experiment runner"};
  app.require_subcommand(1);

  std::string manifest;
  std::string pipeline_pos, pipeline_flag;
  std::string out_pos, out_flag;
  std::vector<std::string> overrides;
  int seed = 0;

  auto* run = app.add_subcommand("run", "Solve a manifest and write trajectory, gains and logs");
  run->add_option("MANIFEST", manifest, "Problem manifest")->required();
  run->add_option("PIPELINE", pipeline_pos, "hmddp | al-only | mddp-only");
  run->add_option("OUT", out_pos, "Output directory");
  run->add_option("--pipeline", pipeline_flag, "hmddp | al-only | mddp-only");
  run->add_option("--out", out_flag, "Output directory (default: out)");
  run->add_option("--override", overrides, "Dotted-key parameter override key=value");
  auto* run_seed = run->add_option("--seed", seed, "Random seed (sets problem.seed)");

  auto* verify = app.add_subcommand("verify", "Check analytic derivatives against finite differences");
  verify->add_option("MANIFEST", manifest, "Problem manifest")->required();
  verify->add_option("--override", overrides, "Dotted-key parameter override key=value");
  auto* verify_seed = verify->add_option("--seed", seed, "Random seed (sets problem.seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*verify) {
    std::optional<int> s;
    if (verify_seed->count()) s = seed;
    return verify_command(manifest, overrides, s, std::cout, std::cerr);
  }

  if (!pipeline_pos.empty() && !pipeline_flag.empty() && pipeline_pos != pipeline_flag) {
    std::cerr << "error: conflicting pipelines '" << pipeline_pos << "' and '" << pipeline_flag
              << "'\n";
    return kExitConfig;
  }
  if (!out_pos.empty() && !out_flag.empty() && out_pos != out_flag) {
    std::cerr << "error: conflicting output directories\n";
    return kExitConfig;
  }
  const std::string pname = !pipeline_flag.empty() ? pipeline_flag
                            : !pipeline_pos.empty() ? pipeline_pos
                                                    : "hmddp";
  const auto pipeline = parse_pipeline(pname);
  if (!pipeline) {
    std::cerr << "error: unknown pipeline '" << pname << "' (hmddp | al-only | mddp-only)\n";
    return kExitConfig;
  }

  RunRequest req;
  req.manifest = manifest;
  req.pipeline = *pipeline;
  req.out_dir = !out_flag.empty() ? out_flag : !out_pos.empty() ? out_pos : "out";
  req.overrides = overrides;
  if (run_seed->count()) req.seed = seed;
  return run_command(req, std::cout, std::cerr);
}
