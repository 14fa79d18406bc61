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
// Stationary covariance functions. Isotropic length scale only; jitter is
// deliberately not added here (it belongs to the factorization, not the
// kernel).

#pragma once

#include <Eigen/Dense>
#include <string>

namespace ceibo {

enum class KernelFamily { kSquaredExponential, kMatern52 };

[[nodiscard]] std::string kernel_family_name(KernelFamily family);
[[nodiscard]] KernelFamily parse_kernel_family(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  double length_scale = 1.0;  // > 0
  double amplitude = 1.0;     // > 0; k(x, x) == amplitude

  void validate() const;  // throws std::invalid_argument
};

// Unit-amplitude correlation rho(r) at distance r >= 0; rho(0) = 1 and rho is
// nonincreasing in r for both families.
[[nodiscard]] double kernel_correlation(const KernelSpec& spec, double r);

// amplitude * rho(||a - b||). Throws std::invalid_argument on dimension
// mismatch or an invalid spec.
[[nodiscard]] double kernel_eval(const KernelSpec& spec,
                                 const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b);

// Gram matrix of the rows of X (n x d). Symmetric by construction with the
// diagonal set to amplitude exactly.
[[nodiscard]] Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                                            const Eigen::MatrixXd& X);

// Vector [k(x, X.row(i))]_i.
[[nodiscard]] Eigen::VectorXd kernel_cross(const KernelSpec& spec,
                                           const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& x);

}  // namespace ceibo
