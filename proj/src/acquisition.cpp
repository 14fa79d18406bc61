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

#include "ceibo/acquisition.hpp"

#include <cmath>
#include <sstream>

#include "ceibo/math.hpp"

namespace ceibo {

namespace {
// Beyond this standardized distance Phi/phi underflow; the improvement forms
// switch to their exact limits.
constexpr double kZOverflow = 40.0;
}  // namespace

std::string acquisition_name(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::kExpectedImprovement:
      return "ei";
    case AcquisitionKind::kCorrectedExpectedImprovement:
      return "cei";
    case AcquisitionKind::kProbabilityOfImprovement:
      return "pi";
    case AcquisitionKind::kCorrectedProbabilityOfImprovement:
      return "cpi";
    case AcquisitionKind::kUpperConfidenceBound:
      return "ucb";
  }
  throw std::invalid_argument("unknown acquisition kind");
}

AcquisitionKind parse_acquisition(const std::string& name) {
  if (name == "ei") return AcquisitionKind::kExpectedImprovement;
  if (name == "cei") return AcquisitionKind::kCorrectedExpectedImprovement;
  if (name == "pi") return AcquisitionKind::kProbabilityOfImprovement;
  if (name == "cpi") return AcquisitionKind::kCorrectedProbabilityOfImprovement;
  if (name == "ucb") return AcquisitionKind::kUpperConfidenceBound;
  throw std::invalid_argument("unknown acquisition: " + name);
}

void AcquisitionSpec::validate() const {
  const bool is_ucb = kind == AcquisitionKind::kUpperConfidenceBound;
  if (is_ucb) {
    if (!ucb_beta || !(*ucb_beta > 0.0)) {
      throw std::invalid_argument("ucb requires a positive ucb_beta");
    }
  } else if (ucb_beta) {
    throw std::invalid_argument("ucb_beta is only valid for ucb");
  }
}

Incumbent select_incumbent(const GpPosterior& gp) {
  const Dataset& data = gp.data();
  if (data.size() == 0) {
    throw std::invalid_argument("select_incumbent: no observations");
  }
  Incumbent inc;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double m = gp.mean_model(data.inputs.row(i).transpose());
    // Strict > keeps the lowest index on ties.
    if (inc.index < 0 || m > inc.mean_model) {
      inc.index = i;
      inc.mean_model = m;
    }
  }
  inc.x = data.inputs.row(inc.index).transpose();
  inc.mean = gp.output_mean() + gp.output_std() * inc.mean_model;
  inc.var_model = gp.variance(inc.x);
  return inc;
}

double sigma_tilde_sq(const GpPosterior& gp, const Eigen::VectorXd& x,
                      const Incumbent& incumbent) {
  const double var_x = gp.covariance(x, x);
  const double var_p = gp.covariance(incumbent.x, incumbent.x);
  const double cross = gp.covariance(x, incumbent.x);
  const double raw = var_x + var_p - 2.0 * cross;
  if (raw < -1e-6 * gp.spec().amplitude) {
    std::ostringstream msg;
    msg << "sigma_tilde_sq: raw value " << raw
        << " violates joint-posterior PSD; posterior is broken";
    throw NumericalError(msg.str());
  }
  return std::max(raw, 0.0);
}

double corrected_ei(double u, double sigma_tilde) {
  if (!(sigma_tilde > 0.0)) {
    return 0.0;
  }
  const double z = u / sigma_tilde;
  if (z > kZOverflow) return u;
  if (z < -kZOverflow) return 0.0;
  return sigma_tilde * tau(z);
}

double corrected_ei_direct(double u, double sigma_tilde) {
  if (!(sigma_tilde > 0.0)) {
    return 0.0;
  }
  const double z = u / sigma_tilde;
  if (z > kZOverflow) return u;
  if (z < -kZOverflow) return 0.0;
  return sigma_tilde * normal_pdf(z) + u * normal_cdf(z);
}

double plugin_ei(double u, double sigma) { return corrected_ei(u, sigma); }

double improvement_probability(double u, double deviation) {
  if (!(deviation > 0.0)) {
    // Degenerate: improvement happens iff the mean clears the incumbent.
    return u > 0.0 ? 1.0 : 0.0;
  }
  return normal_cdf(u / deviation);
}

double acquisition_value(const GpPosterior& gp, const AcquisitionSpec& spec,
                         const Incumbent& incumbent, const Eigen::VectorXd& x) {
  spec.validate();
  switch (spec.kind) {
    case AcquisitionKind::kExpectedImprovement: {
      const double u = gp.mean_model(x) - incumbent.mean_model;
      return plugin_ei(u, std::sqrt(gp.variance(x)));
    }
    case AcquisitionKind::kCorrectedExpectedImprovement: {
      const double u = gp.mean_model(x) - incumbent.mean_model;
      return corrected_ei(u, std::sqrt(sigma_tilde_sq(gp, x, incumbent)));
    }
    case AcquisitionKind::kProbabilityOfImprovement: {
      const double u = gp.mean_model(x) - incumbent.mean_model;
      return improvement_probability(u, std::sqrt(gp.variance(x)));
    }
    case AcquisitionKind::kCorrectedProbabilityOfImprovement: {
      const double u = gp.mean_model(x) - incumbent.mean_model;
      return improvement_probability(u,
                                     std::sqrt(sigma_tilde_sq(gp, x, incumbent)));
    }
    case AcquisitionKind::kUpperConfidenceBound:
      return gp.mean_model(x) + std::sqrt(*spec.ucb_beta * gp.variance(x));
  }
  throw std::invalid_argument("unknown acquisition kind");
}

double acquisition_value_original(const GpPosterior& gp,
                                  const AcquisitionSpec& spec,
                                  double model_value) {
  switch (spec.kind) {
    case AcquisitionKind::kExpectedImprovement:
    case AcquisitionKind::kCorrectedExpectedImprovement:
      return model_value * gp.output_std();
    case AcquisitionKind::kProbabilityOfImprovement:
    case AcquisitionKind::kCorrectedProbabilityOfImprovement:
      return model_value;
    case AcquisitionKind::kUpperConfidenceBound:
      return gp.output_mean() + gp.output_std() * model_value;
  }
  throw std::invalid_argument("unknown acquisition kind");
}

}  // namespace ceibo
