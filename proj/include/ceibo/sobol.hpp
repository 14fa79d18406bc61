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
// Gray-code Sobol sequence, 32-bit, dimensions 1..64. Direction numbers are
// the published Joe-Kuo D6 set; dimension 1 is the van der Corput sequence.
// Index 0 (the all-zeros point) is skipped, so the first emitted point of the
// unscrambled 1-d sequence is 0.5.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace ceibo {

class SobolSequence {
 public:
  static constexpr int kMaxDim = 64;

  // scramble_seed == 0 yields the plain sequence; any other value applies a
  // per-dimension XOR digital shift (a randomized but still low-discrepancy
  // scramble). Throws std::invalid_argument for dim outside [1, 64].
  explicit SobolSequence(int dim, std::uint64_t scramble_seed = 0);

  [[nodiscard]] int dim() const { return dim_; }

  // Next point in [0, 1)^dim, componentwise strictly inside (0, 1).
  Eigen::VectorXd next();

  // n points stacked as rows.
  Eigen::MatrixXd take(Eigen::Index n);

 private:
  int dim_;
  std::uint32_t index_ = 0;                          // count of emitted points
  std::vector<std::array<std::uint32_t, 32>> dirs_;  // per-dim direction numbers
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
};

// Convenience wrapper for run initialization: n scrambled points in [0,1]^dim.
[[nodiscard]] Eigen::MatrixXd sobol_init(int dim, Eigen::Index n,
                                         std::uint64_t seed);

}  // namespace ceibo
