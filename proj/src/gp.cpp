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

#include "ceibo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ceibo/math.hpp"

namespace ceibo {

void Dataset::append(const Eigen::VectorXd& x, double y, double noise_var) {
  const Eigen::Index n = inputs.rows();
  if (n == 0 && inputs.cols() == 0) {
    inputs.resize(0, x.size());
  }
  if (x.size() != inputs.cols()) {
    throw std::invalid_argument("Dataset::append: dimension mismatch");
  }
  inputs.conservativeResize(n + 1, Eigen::NoChange);
  inputs.row(n) = x.transpose();
  outputs.conservativeResize(n + 1);
  outputs(n) = y;
  noise_vars.conservativeResize(n + 1);
  noise_vars(n) = noise_var;
}

void Dataset::validate() const {
  if (outputs.size() != inputs.rows() || noise_vars.size() != inputs.rows()) {
    throw std::invalid_argument("Dataset: inputs/outputs/noise_vars lengths differ");
  }
  if (!inputs.allFinite() || !outputs.allFinite() || !noise_vars.allFinite()) {
    throw std::invalid_argument("Dataset: non-finite entries");
  }
  if ((noise_vars.array() < 0.0).any()) {
    throw std::invalid_argument("Dataset: negative noise variance");
  }
}

bool Box::contains(const Eigen::VectorXd& x, double slack) const {
  if (x.size() != lo.size()) return false;
  return (x.array() >= lo.array() - slack).all() &&
         (x.array() <= hi.array() + slack).all();
}

void Box::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw std::invalid_argument("Box: empty or mismatched bounds");
  }
  if (!lo.allFinite() || !hi.allFinite() || !(hi.array() > lo.array()).all()) {
    throw std::invalid_argument("Box: requires finite hi > lo componentwise");
  }
}

Box Box::unit(Eigen::Index dim) {
  Box b;
  b.lo = Eigen::VectorXd::Zero(dim);
  b.hi = Eigen::VectorXd::Ones(dim);
  return b;
}

Eigen::VectorXd PreprocessState::normalize(const Eigen::VectorXd& x) const {
  return (x - box.lo).cwiseQuotient(box.hi - box.lo);
}

Eigen::VectorXd PreprocessState::denormalize(const Eigen::VectorXd& u) const {
  return box.lo + u.cwiseProduct(box.hi - box.lo);
}

namespace {

// Shared fit pipeline: preprocessing, model matrix, factorization with jitter
// escalation, weights. Used by both fit() and the marginal likelihood.
struct FitCore {
  PreprocessState pre;
  Eigen::MatrixXd inputs_norm;
  Eigen::VectorXd y_std;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd weights;
  double jitter_used = 0.0;
};

FitCore build_fit_core(const KernelSpec& spec, const Dataset& data,
                       const FitOptions& opts) {
  spec.validate();
  data.validate();
  opts.box.validate();
  const Eigen::Index n = data.size();
  if (n > 0 && data.dim() != opts.box.dim()) {
    throw std::invalid_argument("fit: data dimension does not match box");
  }

  FitCore core;
  core.pre.box = opts.box;
  core.pre.output_mean = 0.0;
  core.pre.output_std = 1.0;
  if (opts.standardize_outputs && n > 0) {
    core.pre.output_mean = data.outputs.mean();
    const double var =
        (data.outputs.array() - core.pre.output_mean).square().mean();
    const double sd = std::sqrt(var);
    if (std::isfinite(sd) && sd > 0.0) {
      core.pre.output_std = sd;
    }
  }

  core.inputs_norm.resize(n, opts.box.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    core.inputs_norm.row(i) =
        core.pre.normalize(data.inputs.row(i).transpose()).transpose();
  }
  const double s2 = core.pre.output_std * core.pre.output_std;
  core.y_std =
      ((data.outputs.array() - core.pre.output_mean) / core.pre.output_std)
          .matrix();

  if (n == 0) {
    return core;
  }

  const Eigen::MatrixXd K = kernel_matrix(spec, core.inputs_norm);
  const Eigen::VectorXd noise_std_scale = data.noise_vars / s2;
  const double base =
      opts.jitter < 0.0 ? 1e-10 * spec.amplitude : opts.jitter;
  // Escalation ladder; an explicit jitter of zero still gets a fallback so a
  // singular duplicate-point matrix fails loudly only after real retries.
  for (int attempt = 0; attempt <= 3; ++attempt) {
    double j = base;
    if (base == 0.0) {
      j = attempt == 0 ? 0.0
                       : 1e-10 * spec.amplitude * std::pow(10.0, attempt - 1);
    } else {
      j = base * std::pow(10.0, attempt);
    }
    Eigen::MatrixXd A = K;
    A.diagonal() += noise_std_scale;
    A.diagonal().array() += j;
    core.llt.compute(A);
    if (core.llt.info() == Eigen::Success) {
      core.jitter_used = j;
      core.weights = core.llt.solve(core.y_std);
      return core;
    }
  }
  std::ostringstream msg;
  msg << "fit: Cholesky failed after jitter escalation (n=" << n
      << ", length_scale=" << spec.length_scale << ", base jitter=" << base
      << ")";
  throw NumericalError(msg.str());
}

}  // namespace

GpPosterior fit(const KernelSpec& spec, const Dataset& data,
                const FitOptions& opts) {
  FitCore core = build_fit_core(spec, data, opts);
  GpPosterior gp;
  gp.spec_ = spec;
  gp.data_ = data;
  gp.pre_ = core.pre;
  gp.inputs_norm_ = std::move(core.inputs_norm);
  gp.llt_ = std::move(core.llt);
  gp.weights_ = std::move(core.weights);
  gp.jitter_used_ = core.jitter_used;
  return gp;
}

double GpPosterior::mean_model(const Eigen::VectorXd& x) const {
  if (data_.size() == 0) return 0.0;
  const Eigen::VectorXd k = kernel_cross(spec_, inputs_norm_, pre_.normalize(x));
  return k.dot(weights_);
}

double GpPosterior::mean(const Eigen::VectorXd& x) const {
  return pre_.output_mean + pre_.output_std * mean_model(x);
}

double GpPosterior::covariance(const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) const {
  const bool same = a.size() == b.size() && (a.array() == b.array()).all();
  const double prior = kernel_eval(spec_, pre_.normalize(a), pre_.normalize(b));
  if (data_.size() == 0) {
    return prior;
  }
  const Eigen::VectorXd ka = kernel_cross(spec_, inputs_norm_, pre_.normalize(a));
  const Eigen::VectorXd qa = llt_.matrixL().solve(ka);
  if (same) {
    return std::max(prior - qa.squaredNorm(), 0.0);
  }
  const Eigen::VectorXd kb = kernel_cross(spec_, inputs_norm_, pre_.normalize(b));
  const Eigen::VectorXd qb = llt_.matrixL().solve(kb);
  return prior - qa.dot(qb);
}

double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data,
                               const FitOptions& opts) {
  if (data.size() == 0) {
    throw std::invalid_argument("log_marginal_likelihood: empty dataset");
  }
  const FitCore core = build_fit_core(spec, data, opts);
  const double n = static_cast<double>(data.size());
  const double log_det =
      core.llt.matrixLLT().diagonal().array().log().sum() * 2.0;
  return -0.5 * core.y_std.dot(core.weights) - 0.5 * log_det -
         0.5 * n * kLog2Pi;
}

std::vector<double> default_length_scale_grid() {
  std::vector<double> grid(13);
  const double lo = std::log(1e-2), hi = std::log(1e1);
  for (int i = 0; i < 13; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / 12.0);
  }
  return grid;
}

KernelSpec fit_length_scale(KernelFamily family, const Dataset& data,
                            const FitOptions& opts,
                            const std::vector<double>& grid) {
  if (grid.empty()) {
    throw std::invalid_argument("fit_length_scale: empty grid");
  }
  const double kFail = -std::numeric_limits<double>::infinity();
  auto lml_at = [&](double ell) {
    KernelSpec s{family, ell, 1.0};
    try {
      return log_marginal_likelihood(s, data, opts);
    } catch (const NumericalError&) {
      return kFail;
    }
  };

  // Grid pass, ascending; ties prefer the larger length scale.
  int best = -1;
  double best_val = kFail;
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = lml_at(grid[i]);
    if (vals[i] != kFail && vals[i] >= best_val) {
      best_val = vals[i];
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw NumericalError("fit_length_scale: every candidate failed to factor");
  }
  KernelSpec result{family, grid[best], 1.0};
  if (grid.size() == 1) {
    return result;
  }

  // One golden-section refinement on the log-scale bracketing interval.
  const int lo_i = std::max(best - 1, 0);
  const int hi_i = std::min<int>(best + 1, static_cast<int>(grid.size()) - 1);
  const auto [log_ell, refined_val] = golden_section_max(
      [&](double t) { return lml_at(std::exp(t)); }, std::log(grid[lo_i]),
      std::log(grid[hi_i]), 20);
  if (refined_val > best_val) {
    result.length_scale = std::exp(log_ell);
  }
  return result;
}

}  // namespace ceibo
