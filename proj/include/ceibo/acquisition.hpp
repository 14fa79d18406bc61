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
// Closed-form acquisition functions over a GpPosterior, the incumbent rule,
// and the corrected predictive variance
//
//   sigma_tilde^2(x) = var(x) + var(x+) - 2 cov(x, x+),
//
// the variance of f(x) - f(x+) under the joint posterior. The corrected
// expected improvement uses sigma_tilde where plug-in EI uses sigma, which
// keeps the acquisition honest when the incumbent's own value is uncertain.
//
// All acquisition values returned here live on the standardized model scale;
// acquisition_value_original() converts to original output units.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "ceibo/gp.hpp"

namespace ceibo {

enum class AcquisitionKind {
  kExpectedImprovement,
  kCorrectedExpectedImprovement,
  kProbabilityOfImprovement,
  kCorrectedProbabilityOfImprovement,
  kUpperConfidenceBound,
};

[[nodiscard]] std::string acquisition_name(AcquisitionKind kind);
[[nodiscard]] AcquisitionKind parse_acquisition(const std::string& name);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::kCorrectedExpectedImprovement;
  std::optional<double> ucb_beta;  // required iff kind == UCB

  void validate() const;  // throws std::invalid_argument
};

struct Incumbent {
  Eigen::Index index = -1;     // row in the observed set
  Eigen::VectorXd x;           // original input units
  double mean = 0.0;           // posterior mean, original units
  double mean_model = 0.0;     // posterior mean, model scale
  double var_model = 0.0;      // posterior variance, model scale
};

// argmax of the posterior mean over the observed inputs; ties resolve to the
// lowest index. Throws std::invalid_argument on an empty dataset.
[[nodiscard]] Incumbent select_incumbent(const GpPosterior& gp);

// Corrected predictive variance, clamped to [0, inf). A raw value below
// -1e-6 * amplitude indicates a broken posterior and raises NumericalError.
[[nodiscard]] double sigma_tilde_sq(const GpPosterior& gp,
                                    const Eigen::VectorXd& x,
                                    const Incumbent& incumbent);

// Pure scalar forms, u = mu(x) - mu(x+) and the relevant deviation. Both
// corrected-EI expressions are exposed because their agreement is itself a
// checked identity.
[[nodiscard]] double corrected_ei(double u, double sigma_tilde);         // sigma_tilde * tau(u/sigma_tilde)
[[nodiscard]] double corrected_ei_direct(double u, double sigma_tilde);  // sigma_tilde*phi + u*Phi
[[nodiscard]] double plugin_ei(double u, double sigma);
[[nodiscard]] double improvement_probability(double u, double deviation);

// Model-scale acquisition value at x.
[[nodiscard]] double acquisition_value(const GpPosterior& gp,
                                       const AcquisitionSpec& spec,
                                       const Incumbent& incumbent,
                                       const Eigen::VectorXd& x);

// Converts a model-scale acquisition value to original output units:
// improvements scale by output_std, probabilities are unit-free, and UCB
// de-standardizes as a mean-like quantity.
[[nodiscard]] double acquisition_value_original(const GpPosterior& gp,
                                                const AcquisitionSpec& spec,
                                                double model_value);

}  // namespace ceibo
