// Copyright 2026 The ceibo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
//
// ceibo command line: run experiments, sweep stopping thresholds, verify the
// numerical identities, list benchmarks.
//
// Exit codes: 0 success, 1 runtime failure (output may be partial),
// 2 configuration/usage error, 3 verification failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ceibo/experiment.hpp"

namespace {

void print_report(const ceibo::VerifyReport& report) {
  for (const ceibo::CheckResult& c : report.checks) {
    std::printf("[%s] %-28s lhs=%-12.5g rhs=%-12.5g margin=%-12.5g %s\n",
                c.pass ? " OK " : "FAIL", c.name.c_str(), c.lhs, c.rhs, c.margin,
                c.note.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential model-based optimization with an "
               "uncertainty-corrected improvement rule"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<int> seeds;
  std::optional<double> kappa;
  std::vector<double> kappa_grid;
  int parallel = 1;

  CLI::App* cmd_run = app.add_subcommand(
      "run", "Execute every (acquisition, seed) pair; write trace CSVs and a summary");
  cmd_run->add_option("--config", config_path, "JSON experiment config")->required();
  cmd_run->add_option("--out", out_dir, "output directory (overrides config/env)");
  cmd_run->add_option("--seeds", seeds, "seed indices (comma separated)")
      ->delimiter(',');
  cmd_run->add_option("--kappa", kappa, "stopping threshold override");
  cmd_run->add_option("--parallel", parallel, "worker thread count");

  CLI::App* cmd_profit = app.add_subcommand(
      "profit", "Sweep the stopping threshold grid over recorded full runs");
  cmd_profit->add_option("--config", config_path, "JSON experiment config")
      ->required();
  cmd_profit->add_option("--out", out_dir, "output directory (overrides config/env)");
  cmd_profit->add_option("--seeds", seeds, "seed indices (comma separated)")
      ->delimiter(',');
  cmd_profit
      ->add_option("--kappa", kappa_grid, "threshold grid override (comma separated)")
      ->delimiter(',');
  cmd_profit->add_option("--parallel", parallel, "worker thread count");

  std::string report_path;
  std::string inject_fault;
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "Run the numerical verification battery");
  cmd_verify->add_option("--report", report_path, "write a JSON report here");
  cmd_verify->add_option("--inject-fault", inject_fault,
                         "test seam: force the named check to fail");

  CLI::App* cmd_list =
      app.add_subcommand("list-benchmarks", "Describe the built-in objectives");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  bool wrote_output = false;
  try {
    if (*cmd_run) {
      ceibo::ExperimentConfig cfg = ceibo::load_experiment_config(config_path);
      ceibo::CliOverrides overrides;
      overrides.out_dir = out_dir;
      overrides.seed_indices = seeds;
      overrides.kappa = kappa;
      overrides.parallel = parallel;
      cfg = ceibo::apply_overrides(cfg, overrides);
      const std::string dir = ceibo::resolve_out_dir(cfg, out_dir);
      wrote_output = true;
      const ceibo::RunOutput result = ceibo::cmd_run(cfg, dir, parallel);
      for (const std::string& path : result.csv_paths) {
        std::printf("wrote %s\n", path.c_str());
      }
      std::printf("wrote %s\n", result.summary_path.c_str());
      return 0;
    }
    if (*cmd_profit) {
      ceibo::ExperimentConfig cfg = ceibo::load_experiment_config(config_path);
      ceibo::CliOverrides overrides;
      overrides.out_dir = out_dir;
      overrides.seed_indices = seeds;
      overrides.kappa_grid = kappa_grid;
      overrides.parallel = parallel;
      cfg = ceibo::apply_overrides(cfg, overrides);
      const std::string dir = ceibo::resolve_out_dir(cfg, out_dir);
      wrote_output = true;
      const ceibo::ProfitOutput result = ceibo::cmd_profit(cfg, dir, parallel);
      std::printf("wrote %s\n", result.table_path.c_str());
      std::printf("wrote %s\n", result.pairs_path.c_str());
      return 0;
    }
    if (*cmd_verify) {
      ceibo::VerifyOptions opts;
      opts.report_path = report_path;
      opts.inject_fault = inject_fault;
      const ceibo::VerifyReport report = ceibo::cmd_verify(opts);
      print_report(report);
      if (!report.all_pass) {
        std::fprintf(stderr, "verification failed: %s\n",
                     report.first_failure().c_str());
        return 3;
      }
      std::printf("all checks passed\n");
      return 0;
    }
    if (*cmd_list) {
      for (const std::string& line : ceibo::list_benchmark_lines()) {
        std::printf("%s\n", line.c_str());
      }
      return 0;
    }
  } catch (const ceibo::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (wrote_output) {
      std::fprintf(stderr, "output may be partial in the chosen directory\n");
    }
    return 1;
  }
  return 0;
}
