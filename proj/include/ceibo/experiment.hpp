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
// Experiment orchestration behind the CLI: JSON config parsing, run/profit
// drivers with deterministic seed fan-out, CSV/JSON emission (atomic, RFC-4180,
// LF, 17 significant digits), and the verification battery.
//
// Seed policy: run seed = split(master_seed, seed_index), independent of the
// acquisition, so every acquisition sees the same initialization and noise
// stream per seed index (paired comparisons).

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceibo/analysis.hpp"
#include "ceibo/benchmarks.hpp"
#include "ceibo/bo.hpp"

namespace ceibo {

// Invalid or unparseable configuration; the message carries the field path
// and, for syntax errors, the parser's position diagnostics. Maps to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string benchmark = "sphere3";    // analytic name, or "gp_sample"
  std::uint64_t gp_sample_seed = 0;     // used when benchmark == "gp_sample"
  NoiseModel noise = NoiseModel::uniform_fraction(0.1);
  std::vector<AcquisitionSpec> acquisitions;
  int max_iters = 60;
  int init_count = -1;                  // < 0: default 3 * dim
  double kappa = 0.0;
  std::vector<double> kappa_grid;       // profit verb only
  std::uint64_t master_seed = 20260818;
  std::vector<int> seed_indices{0};
  KernelFamily kernel_family = KernelFamily::kSquaredExponential;
  std::vector<double> length_scale_grid;  // empty: default grid
  double jitter = -1.0;
  AcqOptimizerConfig acq_opt;
  std::string out_dir;                  // optional; see resolve_out_dir

  void validate() const;  // throws ConfigError
};

[[nodiscard]] ExperimentConfig parse_experiment_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_experiment_config(const std::string& path);

// Canonical serialization; parse(serialize(cfg)) == cfg and the text is
// byte-stable across round trips.
[[nodiscard]] std::string serialize_experiment_config(const ExperimentConfig&);

// Precedence: --out flag, config out_dir, CEIBO_OUT_DIR, "./ceibo_out".
[[nodiscard]] std::string resolve_out_dir(const ExperimentConfig& cfg,
                                          const std::string& cli_out);

struct CliOverrides {
  std::string out_dir;                  // --out
  std::vector<int> seed_indices;        // --seeds
  std::optional<double> kappa;          // --kappa (run); grid override uses
  std::vector<double> kappa_grid;       //   the same flag for profit
  int parallel = 1;                     // --parallel
};

[[nodiscard]] ExperimentConfig apply_overrides(ExperimentConfig cfg,
                                               const CliOverrides& o);

// One materialized (benchmark, acquisition, seed) run.
struct CompletedRun {
  std::string acquisition;
  int seed_index = 0;
  RunTrace trace;
};

struct RunOutput {
  std::vector<std::string> csv_paths;
  std::string summary_path;
};

// Executes every (acquisition, seed) pair, writes one trace CSV each plus a
// summary JSON with per-iteration medians and 95% bootstrap bands.
RunOutput cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
                  int parallel);

struct ProfitOutput {
  std::string table_path;  // rows {kappa, acquisition, mean_profit, std_err, mean_t_kappa}
  std::string pairs_path;  // long-format per-seed profits for external stats
};

// Runs each (acquisition, seed) once with kappa = 0 and evaluates the whole
// kappa grid on the recorded traces (exact; see compute_profit).
ProfitOutput cmd_profit(const ExperimentConfig& cfg, const std::string& out_dir,
                        int parallel);

struct VerifyOptions {
  std::string report_path;  // empty: report printed to stdout only
  std::string inject_fault; // test seam: name of a check to corrupt
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;
  [[nodiscard]] std::string first_failure() const;
};

// The numerical verification battery: tau identities, information-gain
// equivalence, variance-sum bound, sigma-tilde triangle, closed-form vs
// quadrature and MC, noiseless degeneration, stopping-gap inequalities on a
// fresh seeded run, and GP-vs-dense-solve agreement.
[[nodiscard]] VerifyReport cmd_verify(const VerifyOptions& opts);

[[nodiscard]] std::vector<std::string> list_benchmark_lines();

// ---- Emission helpers (exposed for tests) -----------------------------------

[[nodiscard]] std::string format_float(double v);  // %.17g
[[nodiscard]] std::string csv_escape(const std::string& field);
void write_file_atomic(const std::string& path, const std::string& content);
[[nodiscard]] std::string trace_csv(const RunTrace& trace);
[[nodiscard]] std::string verify_report_json(const VerifyReport& report);

}  // namespace ceibo
