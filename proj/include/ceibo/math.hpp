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
// Scalar numerics shared across the library: Gaussian pdf/cdf, the
// tau(z) = z*Phi(z) + phi(z) helper, a reproducible random stream, and a
// golden-section line maximizer.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>

namespace ceibo {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLog2Pi = 1.83787706640934548356;

[[nodiscard]] inline double normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// erfc-based Phi stays accurate in the lower tail where 1 - Phi(-z) would
// round to zero.
[[nodiscard]] inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / kSqrt2);
}

// Expected positive part of N(z, 1); >= max(z, 0) and strictly increasing.
[[nodiscard]] inline double tau(double z) {
  return z * normal_cdf(z) + normal_pdf(z);
}

// SplitMix64 finalizer. Used to derive independent per-run seeds from one
// master seed; the stream index alone determines the child seed.
[[nodiscard]] inline std::uint64_t split_seed(std::uint64_t master,
                                              std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled uniform/normal conversions. The std
// distributions are implementation-defined, which would break byte-identical
// reproducibility of traces across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0, 1]; safe under log().
  double uniform_pos() { return 1.0 - uniform(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Golden-section search for a maximum of f on [lo, hi]. Returns the best
// point among every probe made (both bracket ends included), so the result
// never regresses below the better endpoint even on non-unimodal slices.
template <typename F>
[[nodiscard]] std::pair<double, double> golden_section_max(const F& f,
                                                           double lo, double hi,
                                                           int iters) {
  constexpr double kInvPhi = 0.61803398874989484820;
  double best_x = lo;
  double best_v = f(lo);
  const double v_hi = f(hi);
  if (v_hi > best_v) {
    best_x = hi;
    best_v = v_hi;
  }
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  auto consider = [&](double x, double v) {
    if (v > best_v) {
      best_x = x;
      best_v = v;
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  return {best_x, best_v};
}

}  // namespace ceibo
