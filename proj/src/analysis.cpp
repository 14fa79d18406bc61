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

#include "ceibo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ceibo/acquisition.hpp"
#include "ceibo/kernels.hpp"

namespace ceibo {

namespace {

constexpr double kPi = std::numbers::pi;

void check_noise_positive(const Eigen::VectorXd& noise_vars, const char* where) {
  for (Eigen::Index i = 0; i < noise_vars.size(); ++i) {
    if (!(noise_vars(i) > 0.0) || !std::isfinite(noise_vars(i))) {
      std::ostringstream msg;
      msg << where << ": noise variance " << i << " must be positive and finite";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

void AnalysisConfig::validate() const {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("AnalysisConfig: delta must lie in (0, 1)");
  }
  if (!(rkhs_norm_bound > 0.0) || !std::isfinite(rkhs_norm_bound)) {
    throw std::invalid_argument("AnalysisConfig: rkhs_norm_bound must be > 0");
  }
}

std::vector<double> sequence_predictive_variances(
    const KernelSpec& spec, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& noise_vars, double jitter,
    const std::optional<Eigen::VectorXd>& probe) {
  spec.validate();
  const Eigen::Index T = X.rows();
  if (noise_vars.size() != T) {
    throw std::invalid_argument(
        "sequence_predictive_variances: noise count must match row count");
  }
  if (probe && probe->size() != X.cols()) {
    throw std::invalid_argument(
        "sequence_predictive_variances: probe dimension mismatch");
  }
  const double jit = jitter < 0.0 ? 1e-10 * spec.amplitude : jitter;

  std::vector<double> vars(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd x = probe ? *probe : Eigen::VectorXd(X.row(t));
    if (t == 0) {
      vars[0] = spec.amplitude;
      continue;
    }
    const Eigen::MatrixXd Xt = X.topRows(t);
    Eigen::MatrixXd A = kernel_matrix(spec, Xt);
    A.diagonal() += noise_vars.head(t);
    A.diagonal().array() += jit;
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
      throw NumericalError(
          "sequence_predictive_variances: prefix factorization failed");
    }
    const Eigen::VectorXd k = kernel_cross(spec, Xt, x);
    vars[static_cast<std::size_t>(t)] =
        spec.amplitude - k.dot(llt.solve(k));
  }
  return vars;
}

std::vector<double> info_gain_terms(const std::vector<double>& pred_vars,
                                    const Eigen::VectorXd& noise_vars) {
  if (noise_vars.size() != static_cast<Eigen::Index>(pred_vars.size())) {
    throw std::invalid_argument("info_gain_terms: length mismatch");
  }
  check_noise_positive(noise_vars, "info_gain_terms");
  std::vector<double> terms(pred_vars.size());
  for (std::size_t t = 0; t < pred_vars.size(); ++t) {
    const double v = pred_vars[t];
    if (v < -1e-8) {
      throw std::invalid_argument(
          "info_gain_terms: predictive variance is significantly negative");
    }
    terms[t] = 0.5 * std::log1p(std::max(v, 0.0) /
                                noise_vars(static_cast<Eigen::Index>(t)));
  }
  return terms;
}

double info_gain_sequential(const std::vector<double>& pred_vars,
                            const Eigen::VectorXd& noise_vars) {
  const std::vector<double> terms = info_gain_terms(pred_vars, noise_vars);
  double sum = 0.0;
  for (const double t : terms) sum += t;
  return sum;
}

double info_gain_logdet(const Eigen::MatrixXd& K,
                        const Eigen::VectorXd& noise_vars) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n) {
    throw std::invalid_argument("info_gain_logdet: K must be square");
  }
  if (noise_vars.size() != n) {
    throw std::invalid_argument("info_gain_logdet: noise count mismatch");
  }
  check_noise_positive(noise_vars, "info_gain_logdet");
  if (n == 0) return 0.0;

  const double scale = std::max(K.cwiseAbs().maxCoeff(), 1.0);
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("info_gain_logdet: K must be symmetric");
  }

  const Eigen::VectorXd s_inv_half = noise_vars.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd W =
      s_inv_half.asDiagonal() * K * s_inv_half.asDiagonal();
  W = 0.5 * (W + W.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("info_gain_logdet: eigendecomposition failed");
  }
  const double w_scale = std::max(W.cwiseAbs().maxCoeff(), 1.0);
  double half_logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -1e-8 * static_cast<double>(n) * w_scale) {
      throw std::invalid_argument("info_gain_logdet: K is not positive semidefinite");
    }
    half_logdet += 0.5 * std::log1p(std::max(lambda, 0.0));
  }
  return half_logdet;
}

InfoGainReport make_info_gain_report(const KernelSpec& spec,
                                     const Eigen::MatrixXd& X,
                                     const Eigen::VectorXd& noise_vars,
                                     double jitter) {
  InfoGainReport report;
  const std::vector<double> vars =
      sequence_predictive_variances(spec, X, noise_vars, jitter);
  report.per_step_terms = info_gain_terms(vars, noise_vars);
  report.sequential_value = 0.0;
  for (const double t : report.per_step_terms) report.sequential_value += t;
  report.logdet_value = info_gain_logdet(kernel_matrix(spec, X), noise_vars);
  return report;
}

std::vector<CheckResult> check_variance_sum_bound(
    const KernelSpec& spec, const Eigen::MatrixXd& X,
    const Eigen::VectorXd& noise_vars, const std::vector<Eigen::VectorXd>& probes,
    double jitter, double tol) {
  spec.validate();
  if (spec.amplitude > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "check_variance_sum_bound: requires amplitude <= 1 so that "
        "predictive variances stay within the bound's domain");
  }
  check_noise_positive(noise_vars, "check_variance_sum_bound");
  const double upsilon_max_sq = noise_vars.maxCoeff();
  const double denom = std::log1p(1.0 / upsilon_max_sq);

  std::vector<CheckResult> results;
  results.reserve(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const std::vector<double> vars =
        sequence_predictive_variances(spec, X, noise_vars, jitter, probes[p]);
    double lhs = 0.0;
    double gain = 0.0;
    for (std::size_t t = 0; t < vars.size(); ++t) {
      const double v = std::max(vars[t], 0.0);
      lhs += v;
      gain += 0.5 * std::log1p(v / noise_vars(static_cast<Eigen::Index>(t)));
    }
    CheckResult r;
    std::ostringstream name;
    name << "variance_sum_bound[" << p << "]";
    r.name = name.str();
    r.lhs = lhs;
    r.rhs = (2.0 / denom) * gain;
    r.margin = r.rhs - r.lhs;
    r.pass = r.margin >= -tol;
    results.push_back(std::move(r));
  }
  return results;
}

double gain_ratio(double s) {
  if (!(s > -1.0)) {
    throw std::invalid_argument("gain_ratio: argument must exceed -1");
  }
  if (s == 0.0) return 1.0;
  return s / std::log1p(s);
}

double beta_schedule(double t, double achieved_gain, const AnalysisConfig& cfg) {
  cfg.validate();
  if (!(t >= 1.0)) {
    throw std::invalid_argument("beta_schedule: t must be >= 1");
  }
  if (achieved_gain < 0.0) {
    throw std::invalid_argument("beta_schedule: gain must be >= 0");
  }
  const double ln = std::log(t / cfg.delta);
  return 2.0 * cfg.rkhs_norm_bound * cfg.rkhs_norm_bound +
         300.0 * achieved_gain * ln * ln * ln;
}

namespace {

StoppingConstant stopping_constant_impl(double kappa, double numerator) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("stopping_constant: kappa must be finite and > 0");
  }
  StoppingConstant c;
  c.raw = std::log(numerator / (kPi * kappa * kappa));
  c.clamped = c.raw < 0.0;
  c.value = std::max(c.raw, 0.0);
  return c;
}

}  // namespace

StoppingConstant stopping_constant(double kappa) {
  return stopping_constant_impl(kappa, 2.0);
}

StoppingConstant stopping_constant_alt(double kappa) {
  return stopping_constant_impl(kappa, 1.0);
}

double regret_bound_rhs(double T, double achieved_gain, double beta, double C,
                        double upsilon_max) {
  if (!(T >= 1.0) || achieved_gain < 0.0 || beta < 0.0 || C < 0.0 ||
      !(upsilon_max > 0.0)) {
    throw std::invalid_argument("regret_bound_rhs: invalid arguments");
  }
  const double lead =
      std::sqrt(2.0 * T * achieved_gain / std::log1p(1.0 / (upsilon_max * upsilon_max)));
  return lead * (std::sqrt(beta) + std::sqrt(2.0 * (1.0 + C)) +
                 std::sqrt(3.0 * (1.0 + C + beta)));
}

GpPosterior rebuild_posterior(const RunTrace& trace, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= trace.records.size()) {
    throw std::invalid_argument("rebuild_posterior: index out of range");
  }
  const IterationRecord& rec = trace.records[static_cast<std::size_t>(index)];
  if (rec.is_init) {
    throw std::invalid_argument(
        "rebuild_posterior: init rows have no associated posterior");
  }
  Dataset data;
  for (int i = 0; i < index; ++i) {
    const IterationRecord& prev = trace.records[static_cast<std::size_t>(i)];
    if (!prev.y.has_value()) {
      throw std::invalid_argument(
          "rebuild_posterior: unevaluated row inside the prefix");
    }
    data.append(prev.x, *prev.y, prev.noise_var);
  }
  FitOptions opts;
  opts.box = trace.config.bounds;
  opts.jitter = trace.config.jitter;
  KernelSpec spec;
  spec.family = trace.config.kernel_family;
  spec.length_scale = rec.length_scale;
  spec.amplitude = 1.0;
  return fit(spec, data, opts);
}

GapLemmaReport check_stopping_gap_lemma(const RunTrace& trace, double kappa,
                                        double tol) {
  GapLemmaReport report;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterationRecord& rec = trace.records[i];
    if (rec.is_init || !rec.y.has_value()) continue;
    if (!(rec.acq_value >= kappa)) continue;

    const GpPosterior gp = rebuild_posterior(trace, static_cast<int>(i));
    const Incumbent incumbent = select_incumbent(gp);
    const double mu_x = gp.mean_model(rec.x);
    const double st = std::sqrt(sigma_tilde_sq(gp, rec.x, incumbent));
    const double gap = incumbent.mean_model - mu_x;

    const double kappa_std = kappa / gp.output_std();
    const StoppingConstant c = stopping_constant(kappa_std);
    const StoppingConstant c_alt = stopping_constant_alt(kappa_std);
    report.constant_discrepancy = c.raw - c_alt.raw;

    GapLemmaRecord g;
    g.iter = rec.iter;
    g.gap = gap;
    g.sigma_tilde = st;
    g.z = st > 0.0 ? -gap / st : 0.0;
    g.c_bound = std::sqrt(c.value) * st;
    g.tau_neg_z = st > 0.0 ? tau(-g.z) : 0.0;
    g.tau_bound = 1.0 + std::sqrt(c.value);
    g.tau_bound_alt = 1.0 + std::sqrt(c_alt.value);
    g.gap_vacuous = gap < 0.0;
    g.gap_holds = g.gap_vacuous || gap <= g.c_bound + tol;
    g.tau_holds = g.tau_neg_z <= g.tau_bound + tol;
    g.tau_holds_alt = g.tau_neg_z <= g.tau_bound_alt + tol;

    ++report.checked;
    if (!g.gap_holds) ++report.gap_violations;
    if (!g.tau_holds) ++report.tau_violations;
    if (!g.tau_holds_alt) ++report.tau_violations_alt;
    report.records.push_back(std::move(g));
  }
  return report;
}

bool confidence_event(double mu, double f, double sigma, double beta,
                      double tol) {
  return std::abs(mu - f) <= std::sqrt(beta) * sigma + tol;
}

bool lower_bound_event(double alpha, double improvement, double sigma_x,
                       double sigma_plus, double beta, double tol) {
  const double floor_value =
      std::max(improvement - std::sqrt(beta) * (sigma_x + sigma_plus), 0.0);
  return alpha >= floor_value - tol;
}

bool regret_decomposition_event(double regret, double sigma_x,
                                double sigma_star, double sigma_plus,
                                double beta, double C, double tol) {
  const double sc = std::sqrt(C);
  const double sb = std::sqrt(beta);
  const double rhs =
      (1.0 + sc) * sigma_x + sb * sigma_star + (1.0 + sc + sb) * sigma_plus;
  return regret <= rhs + tol;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double fa, double b, double fb,
                        double m, double fm, double whole, double tol,
                        int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double corrected_ei_quadrature(double u, double sigma_tilde, double tol) {
  if (!(sigma_tilde > 0.0)) {
    throw std::invalid_argument("corrected_ei_quadrature: requires sigma_tilde > 0");
  }
  const auto integrand = [&](double I) {
    return I * normal_pdf((I - u) / sigma_tilde) / sigma_tilde;
  };
  const double hi = std::max(u, 0.0) + 12.0 * sigma_tilde;
  // Panel knots bracket the density bump so the first Simpson estimate in
  // each panel already sees its structure; a bump far inside a wide panel
  // would otherwise fool the error estimate into terminating at zero.
  std::vector<double> knots{0.0, hi};
  for (const double offset : {-10.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 10.0}) {
    const double k = u + offset * sigma_tilde;
    if (k > 0.0 && k < hi) knots.push_back(k);
  }
  std::sort(knots.begin(), knots.end());
  const double panel_tol = tol / static_cast<double>(knots.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    const double m = 0.5 * (a + b);
    const double fa = integrand(a);
    const double fb = integrand(b);
    const double fm = integrand(m);
    const double whole = simpson(a, b, fa, fm, fb);
    total += adaptive_simpson(integrand, a, fa, b, fb, m, fm, whole, panel_tol, 40);
  }
  return total;
}

std::pair<double, double> corrected_ei_mc(double mu_x, double mu_p, double var_x,
                                          double var_p, double cov,
                                          long n_samples, Rng& rng) {
  if (n_samples < 2) {
    throw std::invalid_argument("corrected_ei_mc: need at least 2 samples");
  }
  if (var_x < 0.0 || var_p < 0.0) {
    throw std::invalid_argument("corrected_ei_mc: variances must be >= 0");
  }
  const double l11 = std::sqrt(var_x);
  const double l21 = l11 > 0.0 ? cov / l11 : 0.0;
  const double l22 = std::sqrt(std::max(var_p - l21 * l21, 0.0));

  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const double z1 = rng.gaussian();
    const double z2 = rng.gaussian();
    const double fx = mu_x + l11 * z1;
    const double fp = mu_p + l21 * z1 + l22 * z2;
    const double imp = std::max(fx - fp, 0.0);
    const double delta = imp - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (imp - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

std::pair<double, double> difference_variance_mc(double var_x, double var_p,
                                                 double cov, long n_samples,
                                                 Rng& rng) {
  if (n_samples < 2) {
    throw std::invalid_argument("difference_variance_mc: need at least 2 samples");
  }
  if (var_x < 0.0 || var_p < 0.0) {
    throw std::invalid_argument("difference_variance_mc: variances must be >= 0");
  }
  const double l11 = std::sqrt(var_x);
  const double l21 = l11 > 0.0 ? cov / l11 : 0.0;
  const double l22 = std::sqrt(std::max(var_p - l21 * l21, 0.0));

  double mean = 0.0;
  double m2 = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const double z1 = rng.gaussian();
    const double z2 = rng.gaussian();
    const double d = l11 * z1 - (l21 * z1 + l22 * z2);
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  // Gaussian sampling variance of the variance estimator.
  const double se = var * std::sqrt(2.0 / static_cast<double>(n_samples - 1));
  return {var, se};
}

}  // namespace ceibo
