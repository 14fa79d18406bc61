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
// Heteroscedastic GP regression with zero prior mean on the standardized
// output scale. Every observation carries its own noise variance; the model
// matrix is K + diag(noise) + jitter*I, factored once per fit.
//
// Scale contract: mean() is de-standardized back to original output units;
// variance()/covariance() stay on the standardized model scale (so an
// amplitude-1 prior bounds them by 1). mean_model() exposes the standardized
// mean for analysis code.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "ceibo/kernels.hpp"

namespace ceibo {

// Factorization or other floating-point breakdowns that survive retries.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Eigen::MatrixXd inputs;      // n x d, original units
  Eigen::VectorXd outputs;     // n
  Eigen::VectorXd noise_vars;  // n, each >= 0

  [[nodiscard]] Eigen::Index size() const { return inputs.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return inputs.cols(); }

  void append(const Eigen::VectorXd& x, double y, double noise_var);
  void validate() const;  // throws std::invalid_argument
};

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;  // hi > lo componentwise

  [[nodiscard]] Eigen::Index dim() const { return lo.size(); }
  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double slack = 0.0) const;
  void validate() const;

  static Box unit(Eigen::Index dim);
};

// Input min-max normalization (from the declared search box, never from the
// data) plus output standardization constants.
struct PreprocessState {
  Box box;
  double output_mean = 0.0;
  double output_std = 1.0;  // > 0; constant outputs fall back to 1

  [[nodiscard]] Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd denormalize(const Eigen::VectorXd& u) const;
};

struct FitOptions {
  Box box;                          // normalization box; required
  double jitter = -1.0;             // < 0 selects the default 1e-10 * amplitude
  bool standardize_outputs = true;  // false leaves outputs on their raw scale
};

class GpPosterior {
 public:
  // Queries are in original input units; extrapolation outside the box is
  // permitted (normalized coordinates simply leave [0,1]^d).
  [[nodiscard]] double mean(const Eigen::VectorXd& x) const;
  [[nodiscard]] double mean_model(const Eigen::VectorXd& x) const;

  // Posterior covariance k(a,b) - k_a^T (K+S)^{-1} k_b on the model scale.
  // Identical arguments clamp the tiny negative residue to zero so that
  // covariance(x, x) is a valid variance.
  [[nodiscard]] double covariance(const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) const;
  [[nodiscard]] double variance(const Eigen::VectorXd& x) const {
    return covariance(x, x);
  }

  [[nodiscard]] const KernelSpec& spec() const { return spec_; }
  [[nodiscard]] const Dataset& data() const { return data_; }
  [[nodiscard]] const PreprocessState& preprocess() const { return pre_; }
  [[nodiscard]] double output_mean() const { return pre_.output_mean; }
  [[nodiscard]] double output_std() const { return pre_.output_std; }
  [[nodiscard]] double jitter_used() const { return jitter_used_; }
  // Packed Cholesky storage of K + S + jitter*I; lower triangle is L.
  // Meaningful only for a nonempty dataset.
  [[nodiscard]] const Eigen::MatrixXd& factor() const {
    return llt_.matrixLLT();
  }

  friend GpPosterior fit(const KernelSpec&, const Dataset&, const FitOptions&);

 private:
  KernelSpec spec_;
  Dataset data_;
  PreprocessState pre_;
  Eigen::MatrixXd inputs_norm_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;
  double jitter_used_ = 0.0;
};

// Factors K + diag(noise/std^2) + jitter*I. On failure the jitter escalates
// x10 up to three times before a NumericalError carries the diagnostics.
[[nodiscard]] GpPosterior fit(const KernelSpec& spec, const Dataset& data,
                              const FitOptions& opts);

// Standard Gaussian log marginal likelihood on the (optionally standardized)
// outputs, computed through the same factorization path as fit().
[[nodiscard]] double log_marginal_likelihood(const KernelSpec& spec,
                                             const Dataset& data,
                                             const FitOptions& opts);

// Maximizes the LML over the length-scale grid, then refines by one
// golden-section pass on the bracketing interval. Ties prefer the larger
// length scale; candidates whose factorization fails are skipped.
[[nodiscard]] KernelSpec fit_length_scale(KernelFamily family,
                                          const Dataset& data,
                                          const FitOptions& opts,
                                          const std::vector<double>& grid);

// Default 13-point log grid on [1e-2, 1e1] (normalized input scale).
[[nodiscard]] std::vector<double> default_length_scale_grid();

}  // namespace ceibo
