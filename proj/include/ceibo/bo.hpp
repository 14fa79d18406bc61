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
// The sequential optimization loop: Sobol initialization, per-iteration
// hyperparameter refit, acquisition maximization, the kappa stopping test,
// and trace recording. The loop is a maximizer; minimization benchmarks are
// wrapped as -f by the experiment driver.
//
// Iteration indexing: rows are numbered by evaluation, 1..max_iters,
// including the initialization evaluations. When the stopping test fires
// after n evaluations, a terminal row with index n+1 records the rejected
// candidate and its acquisition value but no observation; t_kappa = n.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ceibo/acquisition.hpp"
#include "ceibo/gp.hpp"
#include "ceibo/math.hpp"
#include "ceibo/sobol.hpp"

namespace ceibo {

struct AcqOptimizerConfig {
  int n_raw_per_dim = 512;  // candidate count = n_raw_per_dim * dim
  int n_refine = 5;         // starts kept for coordinate refinement
  int refine_iters = 3;     // coordinate sweeps per start
  int golden_iters = 24;    // golden-section probes per coordinate

  void validate() const;
};

struct RunConfig {
  Box bounds;
  int max_iters = 60;
  int init_count = -1;  // < 0 selects the default 3 * dim
  double kappa = 0.0;   // original output units; 0 disables early stopping
  AcquisitionSpec acquisition;
  KernelFamily kernel_family = KernelFamily::kSquaredExponential;
  std::vector<double> length_scale_grid;  // empty selects the default grid
  double jitter = -1.0;
  std::uint64_t seed = 0;
  AcqOptimizerConfig acq_opt;

  [[nodiscard]] int resolved_init_count() const;
  void validate() const;  // throws std::invalid_argument
};

struct IterationRecord {
  int iter = 0;                 // 1-based evaluation index
  Eigen::VectorXd x;            // original units
  std::optional<double> y;      // empty on the terminal (rejected) row
  double noise_var = 0.0;       // upsilon_t^2; 0 on the terminal row
  bool is_init = false;

  // Model state at selection time (records below are NaN on init rows).
  double acq_value = 0.0;        // original output units
  double acq_value_model = 0.0;  // standardized scale
  double incumbent_mean = 0.0;   // original units
  double incumbent_mean_model = 0.0;
  Eigen::Index incumbent_index = -1;
  double length_scale = 0.0;     // fitted kernel length scale (normalized inputs)
  double output_mean = 0.0;      // standardization constants of this fit
  double output_std = 1.0;
  double pred_var_model = 0.0;        // sigma_{t-1}^2(x_t)
  double incumbent_var_model = 0.0;   // sigma_{t-1}^2(x_t^+)
  double sigma_tilde_model = 0.0;     // sigma_tilde_{t-1}(x_t)

  // Truth metrics (NaN when no truth oracle): minimization-scale gaps of the
  // incumbent, and the simple regret f_max(x*) - f_max(x_t) of the selected
  // point on the maximization scale.
  double log_gap = 0.0;
  double l2_gap = 0.0;
  double regret = 0.0;
};

enum class TerminationReason { kKappaReached, kBudgetExhausted };

// Noiseless truth on the loop's maximization scale, used for regret/gap
// metrics and profit evaluation.
struct TruthInfo {
  std::function<double(const Eigen::VectorXd&)> f_max;
  double f_max_opt = 0.0;   // max over the box
  Eigen::VectorXd x_opt;
};

struct RunTrace {
  RunConfig config;
  std::vector<IterationRecord> records;
  TerminationReason reason = TerminationReason::kBudgetExhausted;
  std::optional<int> terminated_at;  // index of the terminal row (kappa only)

  // Incumbent of the complete dataset, fitted once after the loop ends.
  Eigen::VectorXd final_incumbent_x;
  double final_incumbent_mean = 0.0;
  Eigen::Index final_incumbent_index = -1;
};

// Noisy oracle: x -> (y, noise variance), maximization scale.
using Objective =
    std::function<std::pair<double, double>(const Eigen::VectorXd&)>;

// Multi-start derivative-free maximization of the acquisition over the box:
// Sobol + uniform candidates, then golden-section coordinate sweeps from the
// best n_refine. Returns the best point seen and its model-scale value.
[[nodiscard]] std::pair<Eigen::VectorXd, double> maximize_acquisition(
    const GpPosterior& gp, const AcquisitionSpec& spec,
    const Incumbent& incumbent, const Box& bounds,
    const AcqOptimizerConfig& opt, Rng& rng);

[[nodiscard]] RunTrace run_bo(const RunConfig& config, const Objective& objective,
                              const TruthInfo* truth = nullptr);

// profit(kappa) = f(x+ at t_kappa) - kappa * t_kappa, all in original units.
[[nodiscard]] double profit_value(double f_plus, double kappa, int t_kappa);

struct ProfitResult {
  double profit = 0.0;
  int t_kappa = 0;
  bool kappa_reached = false;  // false means t_kappa fell back to max_iters
  double incumbent_truth = 0.0;
  Eigen::VectorXd incumbent_x;
};

// Evaluates the stopping rule for an arbitrary kappa on a recorded trace.
// Exact for traces recorded with kappa = 0: the threshold only affects the
// stop test, so the hypothetical kappa-run shares the recorded prefix.
// The truth oracle must be on the trace's maximization scale.
[[nodiscard]] ProfitResult compute_profit(const RunTrace& trace,
                                          const TruthInfo& truth,
                                          double kappa);

}  // namespace ceibo
