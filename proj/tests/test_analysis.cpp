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

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "ceibo/acquisition.hpp"
#include "ceibo/analysis.hpp"
#include "ceibo/benchmarks.hpp"
#include "ceibo/bo.hpp"

using namespace ceibo;

namespace {

constexpr double kLog2 = 0.693147180559945309;

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      X(i, j) = rng.uniform();
    }
  }
  return X;
}

Eigen::VectorXd random_noise(Eigen::Index n, std::uint64_t seed, double lo,
                             double hi) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = rng.uniform(lo, hi);
  }
  return v;
}

// Fast stopped-clock run used by trace-based checks.
RunTrace small_cei_run(std::uint64_t seed, int max_iters, int init_count) {
  const auto fn = make_benchmark("sphere3");
  RunConfig cfg;
  cfg.bounds = fn.bounds;
  cfg.max_iters = max_iters;
  cfg.init_count = init_count;
  cfg.acquisition.kind = AcquisitionKind::kCorrectedExpectedImprovement;
  cfg.seed = seed;
  cfg.acq_opt.n_raw_per_dim = 64;
  cfg.acq_opt.n_refine = 3;
  cfg.acq_opt.refine_iters = 2;
  cfg.acq_opt.golden_iters = 12;

  auto rng = std::make_shared<Rng>(split_seed(seed, 0x4E));
  const auto noise = NoiseModel::uniform_fraction(0.1);
  const Objective objective = [fn, rng, noise](const Eigen::VectorXd& x) {
    const auto [y, nv] = noisy_eval(fn, noise, x, *rng);
    return std::make_pair(-y, nv);
  };
  return run_bo(cfg, objective, nullptr);
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("one unit-noise observation gains exactly half log two") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.5, 1.0};
  Eigen::MatrixXd X(1, 1);
  X << 0.5;
  Eigen::VectorXd noise(1);
  noise << 1.0;
  const InfoGainReport report = make_info_gain_report(spec, X, noise, 0.0);
  CHECK(report.sequential_value == doctest::Approx(0.5 * kLog2).epsilon(1e-14));
  CHECK(report.logdet_value == doctest::Approx(0.5 * kLog2).epsilon(1e-12));
  REQUIRE(report.per_step_terms.size() == 1);
}

TEST_CASE("sequential chain rule equals the log determinant") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.4, 1.0};
  const Eigen::MatrixXd X = random_points(12, 2, 8);
  const Eigen::VectorXd noise = random_noise(12, 9, 0.1, 1.5);
  const InfoGainReport report = make_info_gain_report(spec, X, noise, 1e-12);
  CHECK(report.sequential_value ==
        doctest::Approx(report.logdet_value).epsilon(1e-8));
  for (const double term : report.per_step_terms) {
    CHECK(term >= 0.0);
  }
}

TEST_CASE("homoscedastic gain matches the eigenvalue closed form") {
  // With constant noise s^2, the gain is 1/2 sum log(1 + lambda_i / s^2)
  // over the eigenvalues of K; an independent spectral oracle.
  KernelSpec spec{KernelFamily::kMatern52, 0.6, 1.0};
  const Eigen::MatrixXd X = random_points(10, 3, 21);
  const Eigen::MatrixXd K = kernel_matrix(spec, X);
  const Eigen::VectorXd noise = Eigen::VectorXd::Constant(10, 0.3);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    expected += 0.5 * std::log1p(std::max(eig.eigenvalues()(i), 0.0) / 0.3);
  }
  CHECK(info_gain_logdet(K, noise) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("information gain is invariant under reordering the sequence") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.35, 1.0};
  const Eigen::MatrixXd X = random_points(9, 2, 33);
  const Eigen::VectorXd noise = random_noise(9, 34, 0.2, 0.9);

  Eigen::MatrixXd Xr = X.colwise().reverse().eval();
  Eigen::VectorXd nr = noise.reverse().eval();

  const InfoGainReport a = make_info_gain_report(spec, X, noise, 1e-12);
  const InfoGainReport b = make_info_gain_report(spec, Xr, nr, 1e-12);
  CHECK(a.sequential_value == doctest::Approx(b.sequential_value).epsilon(1e-8));
  CHECK(a.logdet_value == doctest::Approx(b.logdet_value).epsilon(1e-10));
}

TEST_CASE("gain computations reject degenerate inputs") {
  Eigen::VectorXd zero_noise(1), ok_noise(1);
  zero_noise << 0.0;
  ok_noise << 0.5;
  CHECK_THROWS_AS((void)info_gain_sequential({0.5}, zero_noise),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)info_gain_terms({-1e-3}, ok_noise),
                  std::invalid_argument);
  // A rounding-level negative variance clamps instead of throwing.
  CHECK(info_gain_sequential({-1e-9}, ok_noise) == 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues {3, -1}: not PSD
  Eigen::VectorXd noise2 = Eigen::VectorXd::Constant(2, 0.5);
  CHECK_THROWS_AS((void)info_gain_logdet(bad, noise2), std::invalid_argument);

  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS((void)info_gain_logdet(asym, noise2), std::invalid_argument);

  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS((void)info_gain_logdet(rect, noise2), std::invalid_argument);
  CHECK_THROWS_AS((void)info_gain_logdet(Eigen::MatrixXd::Identity(2, 2),
                                         Eigen::VectorXd::Constant(3, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("the variance-sum bound is tight for one unit-noise point") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.5, 1.0};
  Eigen::MatrixXd X(1, 1);
  X << 0.3;
  Eigen::VectorXd noise(1);
  noise << 1.0;
  const auto results =
      check_variance_sum_bound(spec, X, noise, {X.row(0).transpose()}, 0.0);
  REQUIRE(results.size() == 1);
  CHECK(results[0].pass);
  CHECK(results[0].lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(results[0].rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(results[0].margin) < 1e-12);
}

TEST_CASE("the variance-sum bound holds across random sequences and probes") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.35, 1.0};
  const Eigen::MatrixXd X = random_points(15, 2, 55);
  const Eigen::VectorXd noise = random_noise(15, 56, 0.15, 1.2);
  std::vector<Eigen::VectorXd> probes;
  Rng rng(57);
  for (int p = 0; p < 10; ++p) {
    Eigen::VectorXd probe(2);
    probe << rng.uniform(), rng.uniform();
    probes.push_back(probe);
  }
  const auto results = check_variance_sum_bound(spec, X, noise, probes, 1e-12);
  REQUIRE(results.size() == 10);
  for (const auto& r : results) {
    CHECK(r.pass);
    CHECK(r.margin >= -1e-10);
  }
}

TEST_CASE("the variance-sum bound refuses amplitudes above one") {
  KernelSpec spec{KernelFamily::kSquaredExponential, 0.5, 1.5};
  const Eigen::MatrixXd X = random_points(3, 1, 1);
  const Eigen::VectorXd noise = Eigen::VectorXd::Constant(3, 0.5);
  CHECK_THROWS_AS(
      (void)check_variance_sum_bound(spec, X, noise, {}, 1e-12),
      std::invalid_argument);
}

TEST_CASE("the gain ratio is one at zero and increases") {
  CHECK(gain_ratio(0.0) == 1.0);
  CHECK(gain_ratio(1.0) == doctest::Approx(1.0 / kLog2).epsilon(1e-14));
  double prev = 1.0;
  for (double s = 0.1; s < 5.0; s += 0.1) {
    const double g = gain_ratio(s);
    CHECK(g > prev);
    prev = g;
  }
  CHECK_THROWS_AS((void)gain_ratio(-1.0), std::invalid_argument);
}

TEST_CASE("the confidence schedule follows its closed form") {
  AnalysisConfig cfg;
  cfg.delta = 0.3;
  cfg.rkhs_norm_bound = 3.0;
  CHECK(beta_schedule(5.0, 0.0, cfg) == doctest::Approx(18.0).epsilon(1e-14));

  cfg.delta = 0.5;
  cfg.rkhs_norm_bound = 2.0;
  const double t = 0.5 * std::exp(1.0);  // ln(t / delta) = 1
  CHECK(beta_schedule(t, 0.7, cfg) == doctest::Approx(218.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)beta_schedule(0.5, 1.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS((void)beta_schedule(2.0, -0.1, cfg), std::invalid_argument);
  cfg.delta = 1.0;
  CHECK_THROWS_AS((void)beta_schedule(2.0, 1.0, cfg), std::invalid_argument);
}

TEST_CASE("stopping constants match reference values and clamp when negative") {
  const StoppingConstant c = stopping_constant(0.01);
  CHECK(c.raw == doctest::Approx(8.758757666686727871).epsilon(1e-14));
  CHECK(c.value == c.raw);
  CHECK(!c.clamped);

  const StoppingConstant alt = stopping_constant_alt(0.01);
  CHECK(alt.raw == doctest::Approx(8.065610486126782562).epsilon(1e-14));
  // The two displayed forms of the constant differ by exactly log 2.
  CHECK(c.raw - alt.raw == doctest::Approx(kLog2).epsilon(1e-14));

  const StoppingConstant big = stopping_constant(1.0);
  CHECK(big.raw < 0.0);
  CHECK(big.clamped);
  CHECK(big.value == 0.0);

  CHECK_THROWS_AS((void)stopping_constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)stopping_constant(-0.1), std::invalid_argument);
}

TEST_CASE("the regret bound value matches a hand-computed instance") {
  // T = 1, gain = log(2)/2, noise 1: leading factor 1; beta = 2, C = 0:
  // sqrt(2) + sqrt(2) + sqrt(9) = 2 sqrt(2) + 3.
  CHECK(regret_bound_rhs(1.0, 0.5 * kLog2, 2.0, 0.0, 1.0) ==
        doctest::Approx(5.828427124746190098).epsilon(1e-13));
  CHECK_THROWS_AS((void)regret_bound_rhs(0.0, 1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)regret_bound_rhs(1.0, 1.0, 1.0, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("posterior reconstruction reproduces the recorded model state") {
  const RunTrace trace = small_cei_run(71, 13, 6);
  REQUIRE(trace.records.size() == 13);

  for (int i = 6; i < 13; ++i) {
    const auto& rec = trace.records[size_t(i)];
    const GpPosterior gp = rebuild_posterior(trace, i);
    CHECK(gp.data().size() == i);
    CHECK(gp.output_std() == doctest::Approx(rec.output_std).epsilon(1e-12));
    CHECK(gp.variance(rec.x) ==
          doctest::Approx(rec.pred_var_model).epsilon(1e-9).scale(1.0));
    const Incumbent inc = select_incumbent(gp);
    CHECK(inc.index == rec.incumbent_index);
    CHECK(inc.mean_model ==
          doctest::Approx(rec.incumbent_mean_model).epsilon(1e-10).scale(1.0));
    const double st = std::sqrt(sigma_tilde_sq(gp, rec.x, inc));
    CHECK(st == doctest::Approx(rec.sigma_tilde_model).epsilon(1e-9).scale(1.0));
  }

  CHECK_THROWS_AS((void)rebuild_posterior(trace, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)rebuild_posterior(trace, -1), std::invalid_argument);
  CHECK_THROWS_AS((void)rebuild_posterior(trace, 13), std::invalid_argument);
}

TEST_CASE("the stopping-gap inequalities hold along a recorded run") {
  const RunTrace trace = small_cei_run(72, 16, 7);
  const GapLemmaReport report = check_stopping_gap_lemma(trace, 0.01);
  CHECK(report.checked > 0);
  CHECK(report.gap_violations == 0);
  CHECK(report.tau_violations == 0);
  CHECK(report.constant_discrepancy == doctest::Approx(kLog2).epsilon(1e-12));
  for (const auto& g : report.records) {
    CHECK(g.tau_bound > 1.0);
    CHECK(g.tau_bound_alt <= g.tau_bound);
    CHECK(g.sigma_tilde >= 0.0);
    if (!g.gap_vacuous) {
      CHECK(g.gap <= g.c_bound + 1e-9);
    }
  }
  // The hypothesis constant requires a positive threshold.
  CHECK_THROWS_AS((void)check_stopping_gap_lemma(trace, 0.0),
                  std::invalid_argument);
}

TEST_CASE("event predicates implement their inequalities") {
  CHECK(confidence_event(1.0, 1.2, 0.1, 4.0));
  CHECK(!confidence_event(1.0, 1.2, 0.1, 1.0));

  CHECK(!lower_bound_event(0.5, 1.0, 0.1, 0.1, 4.0));  // floor 0.6
  CHECK(lower_bound_event(0.5, 1.0, 0.1, 0.1, 9.0));   // floor 0.4
  CHECK(lower_bound_event(0.0, 0.0, 0.0, 0.0, 1.0));   // floor 0

  CHECK(regret_decomposition_event(1.0, 0.2, 0.3, 0.1, 4.0, 1.0));   // rhs 1.4
  CHECK(!regret_decomposition_event(1.5, 0.2, 0.3, 0.1, 4.0, 1.0));
}

TEST_CASE("quadrature reproduces the closed-form improvement integral") {
  struct Case {
    double u, st;
  };
  const Case cases[] = {{0.0, 1.0},  {0.5, 0.7},  {-0.5, 0.7}, {2.0, 0.3},
                        {-2.0, 0.3}, {3.0, 0.05}, {-3.0, 0.05}, {0.1, 2.5}};
  for (const auto& c : cases) {
    const double closed = corrected_ei(c.u, c.st);
    const double quad = corrected_ei_quadrature(c.u, c.st, 1e-10);
    CHECK(quad == doctest::Approx(closed).epsilon(1e-8).scale(1e-4));
  }
  CHECK_THROWS_AS((void)corrected_ei_quadrature(0.5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("a narrow density bump inside the integration range is not missed") {
  // Regression: u >> 0 with tiny sigma concentrates the integrand far from
  // the panel midpoints; naive adaptive Simpson sees three near-zero probes
  // and returns zero.
  const double quad = corrected_ei_quadrature(3.0, 0.05, 1e-10);
  CHECK(quad == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("Monte Carlo agrees with the closed form under the joint posterior") {
  const double mu_x = 0.3, mu_p = 0.1;
  const double var_x = 0.5, var_p = 0.3, cov = 0.2;
  const double u = mu_x - mu_p;
  const double st2 = var_x + var_p - 2.0 * cov;

  Rng rng(2024);
  const auto [est, se] = corrected_ei_mc(mu_x, mu_p, var_x, var_p, cov,
                                         400000, rng);
  CHECK(se > 0.0);
  CHECK(std::abs(est - corrected_ei(u, std::sqrt(st2))) < 4.0 * se);

  const auto [var_est, var_se] =
      difference_variance_mc(var_x, var_p, cov, 400000, rng);
  CHECK(std::abs(var_est - st2) < 4.0 * var_se);

  CHECK_THROWS_AS((void)corrected_ei_mc(0, 0, -1.0, 1.0, 0.0, 100, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)difference_variance_mc(1.0, 1.0, 0.0, 1, rng),
                  std::invalid_argument);
}

TEST_CASE("analysis configuration validation") {
  AnalysisConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.delta = 0.1;
  cfg.rkhs_norm_bound = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
