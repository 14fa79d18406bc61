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
// Numerical embodiment of the theory behind the corrected acquisition:
// information-gain identities, the variance-sum inequality, the confidence
// schedule beta_t, stopping-gap inequalities, and the regret-bound value.
// Everything here is pure analysis over immutable traces and models.
//
// Wherever the maximum information gain gamma_T appears, the achieved gain of
// the actually-selected points is substituted; every report labels it a
// lower-bound proxy (the combinatorial max over subsets is out of scope).

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ceibo/bo.hpp"
#include "ceibo/gp.hpp"

namespace ceibo {

struct AnalysisConfig {
  double delta = 0.1;           // in (0, 1)
  double rkhs_norm_bound = 1.0; // B > 0

  void validate() const;
};

struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs; >= -tol means pass
  bool pass = false;
  std::string note;
};

// ---- Information gain ------------------------------------------------------

// Predictive variances sigma_{t-1}^2 under one fixed kernel, conditioning on
// growing prefixes of the rows of X. With `probe` empty the variance is taken
// at the next selected point x_t; otherwise always at the probe. Points are
// used as given (no normalization) with a zero-mean unit pipeline.
[[nodiscard]] std::vector<double> sequence_predictive_variances(
    const KernelSpec& spec, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& noise_vars, double jitter,
    const std::optional<Eigen::VectorXd>& probe = std::nullopt);

// 1/2 sum log(1 + sigma^2_{t-1}(x_t) / upsilon_t^2). Throws on any
// upsilon_t^2 <= 0 (the noiseless information gain is infinite).
[[nodiscard]] double info_gain_sequential(const std::vector<double>& pred_vars,
                                          const Eigen::VectorXd& noise_vars);
[[nodiscard]] std::vector<double> info_gain_terms(
    const std::vector<double>& pred_vars, const Eigen::VectorXd& noise_vars);

// 1/2 log det(I + S^{-1/2} K S^{-1/2}); rejects K with eigenvalues below
// -1e-8 * n * amplitude-scale.
[[nodiscard]] double info_gain_logdet(const Eigen::MatrixXd& K,
                                      const Eigen::VectorXd& noise_vars);

struct InfoGainReport {
  double sequential_value = 0.0;
  double logdet_value = 0.0;
  std::vector<double> per_step_terms;
};

[[nodiscard]] InfoGainReport make_info_gain_report(
    const KernelSpec& spec, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& noise_vars, double jitter);

// ---- Variance-sum inequality ----------------------------------------------

// Checks, at each probe x, the computable inequality
//   sum_t sigma^2_{t-1}(x) <= (2 / log(1 + upsilon_max^-2))
//                             * 1/2 sum_t log(1 + upsilon_t^-2 sigma^2_{t-1}(x)),
// the pointwise step behind the gain-based bound on summed variances. Requires
// amplitude <= 1 (so sigma^2 <= 1) and all noise variances positive.
[[nodiscard]] std::vector<CheckResult> check_variance_sum_bound(
    const KernelSpec& spec, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& noise_vars,
    const std::vector<Eigen::VectorXd>& probes, double jitter,
    double tol = 1e-10);

// G(s) = s / log(1 + s), the monotone ratio the inequality's proof rides on.
[[nodiscard]] double gain_ratio(double s);

// ---- Confidence schedule and regret bound ----------------------------------

// beta_t = 2 B^2 + 300 * gain * ln^3(t / delta).
[[nodiscard]] double beta_schedule(double t, double achieved_gain,
                                   const AnalysisConfig& cfg);

struct StoppingConstant {
  double value = 0.0;  // max(C, 0)
  double raw = 0.0;    // C before clamping
  bool clamped = false;
};

// C = log(2 / (pi kappa^2)) from the gap inequality's displayed definition.
[[nodiscard]] StoppingConstant stopping_constant(double kappa);
// The alternative statement constant log(1 / (pi kappa^2)), computed for the
// discrepancy report only; strictly smaller by log 2.
[[nodiscard]] StoppingConstant stopping_constant_alt(double kappa);

// sqrt(2 T gain / log(1 + upsilon_max^-2))
//   * (sqrt(beta) + sqrt(2(1+C)) + sqrt(3(1+C+beta))).
[[nodiscard]] double regret_bound_rhs(double T, double achieved_gain,
                                      double beta, double C,
                                      double upsilon_max);

// ---- Stopping-gap inequalities over a trace --------------------------------

// Reconstructs the posterior the loop used when selecting the record at
// `index` (fit on all evaluated rows before it, with the recorded length
// scale). Throws std::invalid_argument for init or out-of-range rows.
[[nodiscard]] GpPosterior rebuild_posterior(const RunTrace& trace, int index);

struct GapLemmaRecord {
  int iter = 0;
  double gap = 0.0;          // mu(x+) - mu(x_t), model scale
  double sigma_tilde = 0.0;  // model scale
  double z = 0.0;            // (mu(x_t) - mu(x+)) / sigma_tilde
  double c_bound = 0.0;      // sqrt(C) * sigma_tilde
  double tau_neg_z = 0.0;
  double tau_bound = 0.0;      // 1 + sqrt(C)
  double tau_bound_alt = 0.0;  // 1 + sqrt(C_alt)
  bool gap_vacuous = false;    // mu(x_t) > mu(x+): hypothesis empty
  bool gap_holds = false;
  bool tau_holds = false;
  bool tau_holds_alt = false;
};

struct GapLemmaReport {
  std::vector<GapLemmaRecord> records;
  int checked = 0;
  int gap_violations = 0;
  int tau_violations = 0;      // against 1 + sqrt(C)
  int tau_violations_alt = 0;  // against the tighter statement constant
  double constant_discrepancy = 0.0;  // C - C_alt = log 2 (reported)
};

// Evaluates, at every evaluated post-init record with acquisition >= kappa,
//   0 <= mu(x+) - mu(x_t) <= sqrt(C) sigma_tilde   (when the hypothesis holds)
//   tau(-z_t) <= 1 + sqrt(C)
// with C built from the standardized kappa of that iteration. Only meaningful
// for corrected-EI traces (the inequalities are properties of that rule).
[[nodiscard]] GapLemmaReport check_stopping_gap_lemma(const RunTrace& trace,
                                                      double kappa,
                                                      double tol = 1e-9);

// ---- Confidence events (probabilistic lemmas) -------------------------------

// |mu(x) - f(x)| <= sqrt(beta) * sigma(x), model scale.
[[nodiscard]] bool confidence_event(double mu, double f, double sigma,
                                    double beta, double tol = 1e-9);

// alpha >= max(I - sqrt(beta) (sigma_x + sigma_plus), 0) - tol, where
// I = max(0, f_x - f_plus) is the true improvement.
[[nodiscard]] bool lower_bound_event(double alpha, double improvement,
                                     double sigma_x, double sigma_plus,
                                     double beta, double tol = 1e-9);

// r <= (1 + sqrt(C)) sigma_x + sqrt(beta) sigma_star
//        + (1 + sqrt(C) + sqrt(beta)) sigma_plus + tol.
[[nodiscard]] bool regret_decomposition_event(double regret, double sigma_x,
                                              double sigma_star,
                                              double sigma_plus, double beta,
                                              double C, double tol = 1e-9);

// ---- Oracles used by the verification surface ------------------------------

// Adaptive Simpson quadrature of the improvement integral
// int_0^inf I N(I; u, sigma_tilde^2) dI; agrees with the closed form.
[[nodiscard]] double corrected_ei_quadrature(double u, double sigma_tilde,
                                             double tol = 1e-10);

// Monte Carlo estimate of E[max(0, f(x) - f(x+))] under the joint bivariate
// posterior N([mu_x, mu_p], [[var_x, cov], [cov, var_p]]). Returns (estimate,
// standard error).
[[nodiscard]] std::pair<double, double> corrected_ei_mc(double mu_x, double mu_p,
                                                        double var_x,
                                                        double var_p, double cov,
                                                        long n_samples,
                                                        Rng& rng);

// Monte Carlo (variance of f(x) - f(x+), standard error of that variance).
[[nodiscard]] std::pair<double, double> difference_variance_mc(
    double var_x, double var_p, double cov, long n_samples, Rng& rng);

}  // namespace ceibo
