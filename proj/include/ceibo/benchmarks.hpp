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
// Synthetic objectives on their canonical boxes, heteroscedastic noise
// models, and GP-prior-sampled 1-d test functions. All benchmarks follow the
// minimization convention; the optimization loop maximizes -f.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ceibo/gp.hpp"
#include "ceibo/math.hpp"

namespace ceibo {

enum class BenchmarkId {
  kHartmann3,
  kGriewank6,
  kLevy4,
  kPowell5,
  kSphere3,
  kGpSampled,
};

struct BenchmarkFunction {
  BenchmarkId id = BenchmarkId::kSphere3;
  std::string name;
  int dim = 0;
  Box bounds;
  std::function<double(const Eigen::VectorXd&)> f;  // noiseless, minimization
  double optimum_value = 0.0;   // f(x*)
  Eigen::VectorXd optimizer;    // one global minimizer x*
  double range_estimate = 0.0;  // max f - min f over the box (Sobol scan)

  // Populated for grid-backed sampled functions only; empty otherwise.
  Eigen::VectorXd grid_x;
  Eigen::VectorXd grid_values;
};

// Throws std::invalid_argument on out-of-bounds queries.
[[nodiscard]] double eval_benchmark(const BenchmarkFunction& fn,
                                    const Eigen::VectorXd& x);

// Analytic benchmarks by name: "hartmann3", "griewank6", "levy4", "powell5",
// "sphere3". The range estimate is a cached 1e5-point Sobol scan.
[[nodiscard]] BenchmarkFunction make_benchmark(const std::string& name);
[[nodiscard]] std::vector<std::string> benchmark_names();

// One draw from the SE(length 3, amplitude 1) prior on an even grid over
// [0, 60]; evaluation snaps to the nearest grid point. Values beyond +-8
// print a regeneration warning to stderr, never a failure.
[[nodiscard]] BenchmarkFunction gp_sampled_function(std::uint64_t seed,
                                                    int grid_points = 4000);

// Grid serialization for reuse across runs: CSV rows "x,value".
void save_gp_sample(const BenchmarkFunction& fn, const std::string& path);
[[nodiscard]] BenchmarkFunction load_gp_sample(const std::string& path);

// Per-query noise level. The uniform-fraction mode draws the noise std
// uniformly on (0, p * range]; the fixed mode always returns the same std.
struct NoiseModel {
  enum class Kind { kUniformFraction, kFixedStd };
  Kind kind = Kind::kUniformFraction;
  double value = 0.1;  // fraction p, or the fixed std

  [[nodiscard]] static NoiseModel uniform_fraction(double p);
  [[nodiscard]] static NoiseModel fixed_std(double s);

  [[nodiscard]] double draw_std(double range_estimate, Rng& rng) const;
};

// y = f(x) + eps with eps ~ N(0, upsilon^2); returns (y, upsilon^2) with the
// realized noise variance reported truthfully.
[[nodiscard]] std::pair<double, double> noisy_eval(const BenchmarkFunction& fn,
                                                   const NoiseModel& noise,
                                                   const Eigen::VectorXd& x,
                                                   Rng& rng);

// log10(max(f(x_plus) - f(x*), 1e-12)) and ||x_plus - x*||_2.
[[nodiscard]] double metric_log_gap(const BenchmarkFunction& fn,
                                    const Eigen::VectorXd& x_plus);
[[nodiscard]] double metric_l2_gap(const BenchmarkFunction& fn,
                                   const Eigen::VectorXd& x_plus);

}  // namespace ceibo
