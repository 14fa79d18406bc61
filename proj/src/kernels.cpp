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

#include "ceibo/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace ceibo {

namespace {
constexpr double kSqrt5 = 2.23606797749978969641;
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::kSquaredExponential:
      return "se";
    case KernelFamily::kMatern52:
      return "matern52";
  }
  throw std::invalid_argument("unknown kernel family");
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "se" || name == "squared_exponential") {
    return KernelFamily::kSquaredExponential;
  }
  if (name == "matern52") {
    return KernelFamily::kMatern52;
  }
  throw std::invalid_argument("unknown kernel family: " + name);
}

void KernelSpec::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw std::invalid_argument("kernel length_scale must be positive");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("kernel amplitude must be positive");
  }
}

double kernel_correlation(const KernelSpec& spec, double r) {
  const double s = r / spec.length_scale;
  switch (spec.family) {
    case KernelFamily::kSquaredExponential:
      return std::exp(-0.5 * s * s);
    case KernelFamily::kMatern52: {
      const double t = kSqrt5 * s;
      return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  throw std::invalid_argument("unknown kernel family");
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& a,
                   const Eigen::VectorXd& b) {
  spec.validate();
  if (a.size() != b.size()) {
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  }
  return spec.amplitude * kernel_correlation(spec, (a - b).norm());
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  spec.validate();
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = spec.amplitude;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v =
          spec.amplitude *
          kernel_correlation(spec, (X.row(i) - X.row(j)).norm());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

Eigen::VectorXd kernel_cross(const KernelSpec& spec, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& x) {
  spec.validate();
  if (X.cols() != x.size()) {
    throw std::invalid_argument("kernel_cross: dimension mismatch");
  }
  Eigen::VectorXd k(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    k(i) = spec.amplitude *
           kernel_correlation(spec, (X.row(i).transpose() - x).norm());
  }
  return k;
}

}  // namespace ceibo
