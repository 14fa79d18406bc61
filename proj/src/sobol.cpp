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
// Direction numbers are the Joe-Kuo D6 set (the same data QuantLib and scipy
// ship); each dimension carries its primitive polynomial degree, the encoded
// inner coefficients a_1..a_{s-1} (most significant bit first), and the
// initial odd direction integers m_1..m_s.

#include "ceibo/sobol.hpp"

#include <bit>
#include <stdexcept>

#include "ceibo/math.hpp"

namespace ceibo {

namespace {

struct DimSpec {
  int degree;
  std::uint32_t poly;  // encoded a_1..a_{s-1}
  std::uint32_t m[9];  // m_1..m_degree
};

// Dimensions 2..64 of the sequence (dimension 1 is van der Corput).
constexpr DimSpec kDims[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
    {7, 7, {1, 1, 3, 13, 7, 35, 63}},
    {7, 8, {1, 3, 5, 9, 1, 25, 53}},
    {7, 14, {1, 3, 1, 13, 9, 35, 107}},
    {7, 19, {1, 3, 1, 5, 27, 61, 31}},
    {7, 21, {1, 1, 5, 11, 19, 41, 61}},
    {7, 28, {1, 3, 5, 3, 3, 13, 69}},
    {7, 31, {1, 1, 7, 13, 1, 19, 1}},
    {7, 32, {1, 3, 7, 5, 13, 19, 59}},
    {7, 37, {1, 1, 3, 9, 25, 29, 41}},
    {7, 41, {1, 3, 5, 13, 23, 1, 55}},
    {7, 42, {1, 3, 7, 3, 13, 59, 17}},
    {7, 50, {1, 3, 1, 3, 5, 53, 69}},
    {7, 55, {1, 1, 5, 5, 23, 33, 13}},
    {7, 56, {1, 1, 7, 7, 1, 61, 123}},
    {7, 59, {1, 1, 7, 9, 13, 61, 49}},
    {7, 62, {1, 3, 3, 5, 3, 55, 33}},
    {8, 14, {1, 3, 1, 15, 31, 13, 49, 245}},
    {8, 21, {1, 3, 5, 15, 31, 59, 63, 97}},
    {8, 22, {1, 3, 1, 11, 11, 11, 77, 249}},
    {8, 38, {1, 3, 1, 11, 27, 43, 71, 9}},
    {8, 47, {1, 1, 7, 15, 21, 11, 81, 45}},
    {8, 49, {1, 3, 7, 3, 25, 31, 65, 79}},
    {8, 50, {1, 3, 1, 1, 19, 11, 3, 205}},
    {8, 52, {1, 1, 5, 9, 19, 21, 29, 157}},
    {8, 56, {1, 3, 7, 11, 1, 33, 89, 185}},
    {8, 67, {1, 3, 3, 3, 15, 9, 79, 71}},
    {8, 70, {1, 3, 7, 11, 15, 39, 119, 27}},
    {8, 84, {1, 1, 3, 1, 11, 31, 97, 225}},
    {8, 97, {1, 1, 1, 3, 23, 43, 57, 177}},
    {8, 103, {1, 3, 7, 7, 17, 17, 37, 71}},
    {8, 115, {1, 3, 1, 5, 27, 63, 123, 213}},
    {8, 122, {1, 1, 3, 5, 11, 43, 53, 133}},
    {9, 8, {1, 3, 5, 5, 29, 17, 47, 173, 479}},
    {9, 13, {1, 3, 3, 11, 3, 1, 109, 9, 69}},
    {9, 16, {1, 1, 1, 5, 17, 39, 23, 5, 343}},
    {9, 22, {1, 3, 1, 5, 25, 15, 31, 103, 499}},
    {9, 25, {1, 1, 1, 11, 11, 17, 63, 105, 183}},
    {9, 44, {1, 1, 5, 11, 9, 29, 97, 231, 363}},
    {9, 47, {1, 1, 5, 15, 19, 45, 41, 7, 383}},
    {9, 52, {1, 3, 7, 7, 31, 19, 83, 137, 221}},
    {9, 55, {1, 1, 1, 3, 23, 15, 111, 223, 83}},
    {9, 59, {1, 1, 5, 13, 31, 15, 55, 25, 161}},
    {9, 62, {1, 1, 3, 13, 25, 47, 39, 87, 257}},
};

std::array<std::uint32_t, 32> direction_numbers(int dim_index) {
  std::array<std::uint32_t, 32> v{};
  if (dim_index == 0) {
    for (int k = 0; k < 32; ++k) {
      v[k] = 1u << (31 - k);
    }
    return v;
  }
  const DimSpec& d = kDims[dim_index - 1];
  const int s = d.degree;
  for (int k = 0; k < s; ++k) {
    v[k] = d.m[k] << (31 - k);
  }
  for (int k = s; k < 32; ++k) {
    std::uint32_t val = v[k - s] ^ (v[k - s] >> s);
    for (int i = 1; i < s; ++i) {
      if ((d.poly >> (s - 1 - i)) & 1u) {
        val ^= v[k - i];
      }
    }
    v[k] = val;
  }
  return v;
}

}  // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t scramble_seed) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("SobolSequence: dim must lie in [1, 64]");
  }
  dirs_.reserve(dim);
  for (int d = 0; d < dim; ++d) {
    dirs_.push_back(direction_numbers(d));
  }
  state_.assign(dim, 0u);
  shift_.assign(dim, 0u);
  if (scramble_seed != 0) {
    Rng rng(scramble_seed);
    for (int d = 0; d < dim; ++d) {
      shift_[d] = static_cast<std::uint32_t>(rng.bits() >> 32);
    }
  }
}

Eigen::VectorXd SobolSequence::next() {
  // Gray-code step: point n differs from n-1 in direction ctz(n). Starting
  // the counter at 1 skips the all-zeros point at index 0.
  ++index_;
  const int j = std::countr_zero(index_);
  Eigen::VectorXd p(dim_);
  for (int d = 0; d < dim_; ++d) {
    state_[d] ^= dirs_[d][j];
    const std::uint32_t bits = state_[d] ^ shift_[d];
    double u = static_cast<double>(bits) * 0x1.0p-32;
    if (u == 0.0) {
      u = 0x1.0p-33;  // scramble can cancel the state exactly; stay inside (0,1)
    }
    p(d) = u;
  }
  return p;
}

Eigen::MatrixXd SobolSequence::take(Eigen::Index n) {
  Eigen::MatrixXd points(n, dim_);
  for (Eigen::Index i = 0; i < n; ++i) {
    points.row(i) = next().transpose();
  }
  return points;
}

Eigen::MatrixXd sobol_init(int dim, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sobol_init: n must be >= 1");
  }
  return SobolSequence(dim, seed).take(n);
}

}  // namespace ceibo
