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

#include "ceibo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ceibo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void AcqOptimizerConfig::validate() const {
  require(n_raw_per_dim >= 1, "AcqOptimizerConfig: n_raw_per_dim must be >= 1");
  require(n_refine >= 0, "AcqOptimizerConfig: n_refine must be >= 0");
  require(refine_iters >= 0, "AcqOptimizerConfig: refine_iters must be >= 0");
  require(golden_iters >= 0, "AcqOptimizerConfig: golden_iters must be >= 0");
}

int RunConfig::resolved_init_count() const {
  return init_count < 0 ? 3 * static_cast<int>(bounds.dim()) : init_count;
}

void RunConfig::validate() const {
  bounds.validate();
  require(max_iters >= 1, "RunConfig: max_iters must be >= 1");
  const int n_init = resolved_init_count();
  require(n_init >= 1, "RunConfig: init_count must be >= 1");
  require(n_init <= max_iters, "RunConfig: init_count must be <= max_iters");
  require(std::isfinite(kappa) && kappa >= 0.0,
          "RunConfig: kappa must be finite and >= 0");
  acquisition.validate();
  require(!std::isnan(jitter) && jitter < 1.0, "RunConfig: jitter out of range");
  for (std::size_t i = 0; i < length_scale_grid.size(); ++i) {
    require(std::isfinite(length_scale_grid[i]) && length_scale_grid[i] > 0.0,
            "RunConfig: length-scale grid entries must be positive");
    if (i > 0) {
      require(length_scale_grid[i] > length_scale_grid[i - 1],
              "RunConfig: length-scale grid must be strictly increasing");
    }
  }
  acq_opt.validate();
}

std::pair<Eigen::VectorXd, double> maximize_acquisition(
    const GpPosterior& gp, const AcquisitionSpec& spec,
    const Incumbent& incumbent, const Box& bounds,
    const AcqOptimizerConfig& opt, Rng& rng) {
  opt.validate();
  bounds.validate();
  const auto dim = bounds.dim();
  const Eigen::VectorXd width = bounds.hi - bounds.lo;

  const auto value_at = [&](const Eigen::VectorXd& x) {
    return acquisition_value(gp, spec, incumbent, x);
  };

  const int n_raw = opt.n_raw_per_dim * static_cast<int>(dim);
  const int n_sobol = n_raw / 2;
  SobolSequence seq(static_cast<int>(dim), rng.bits());

  std::vector<Eigen::VectorXd> cand;
  cand.reserve(static_cast<std::size_t>(n_raw));
  for (int i = 0; i < n_sobol; ++i) {
    cand.push_back(bounds.lo + seq.next().cwiseProduct(width));
  }
  for (int i = n_sobol; i < n_raw; ++i) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
      x(d) = bounds.lo(d) + width(d) * rng.uniform();
    }
    cand.push_back(std::move(x));
  }

  std::vector<double> vals(cand.size());
  Eigen::VectorXd best_x = cand.front();
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    vals[i] = value_at(cand[i]);
    if (vals[i] > best_v) {
      best_v = vals[i];
      best_x = cand[i];
    }
  }

  const int n_starts = std::min<int>(opt.n_refine, static_cast<int>(cand.size()));
  if (n_starts > 0 && opt.refine_iters > 0) {
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + n_starts, order.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    for (int s = 0; s < n_starts; ++s) {
      Eigen::VectorXd x = cand[order[static_cast<std::size_t>(s)]];
      double v = vals[order[static_cast<std::size_t>(s)]];
      for (int sweep = 0; sweep < opt.refine_iters; ++sweep) {
        for (Eigen::Index d = 0; d < dim; ++d) {
          const auto line = [&](double t) {
            Eigen::VectorXd probe = x;
            probe(d) = t;
            return value_at(probe);
          };
          const auto [t_best, v_best] =
              golden_section_max(line, bounds.lo(d), bounds.hi(d), opt.golden_iters);
          if (v_best > v) {
            x(d) = t_best;
            v = v_best;
          }
        }
      }
      if (v > best_v) {
        best_v = v;
        best_x = x;
      }
    }
  }
  return {best_x, best_v};
}

namespace {

// Model-state fields that stay NaN on initialization rows.
void blank_model_fields(IterationRecord& rec) {
  rec.acq_value = kNaN;
  rec.acq_value_model = kNaN;
  rec.incumbent_mean = kNaN;
  rec.incumbent_mean_model = kNaN;
  rec.incumbent_index = -1;
  rec.length_scale = kNaN;
  rec.output_mean = kNaN;
  rec.output_std = kNaN;
  rec.pred_var_model = kNaN;
  rec.incumbent_var_model = kNaN;
  rec.sigma_tilde_model = kNaN;
}

void fill_truth_metrics(IterationRecord& rec, const TruthInfo* truth,
                        const Incumbent* incumbent) {
  rec.log_gap = kNaN;
  rec.l2_gap = kNaN;
  rec.regret = kNaN;
  if (truth == nullptr) return;
  rec.regret = truth->f_max_opt - truth->f_max(rec.x);
  if (incumbent != nullptr) {
    const double gap = truth->f_max_opt - truth->f_max(incumbent->x);
    rec.log_gap = std::log10(std::max(gap, 1e-12));
    rec.l2_gap = (incumbent->x - truth->x_opt).norm();
  }
}

}  // namespace

RunTrace run_bo(const RunConfig& config, const Objective& objective,
                const TruthInfo* truth) {
  config.validate();
  if (!objective) throw std::invalid_argument("run_bo: objective is empty");

  const auto dim = config.bounds.dim();
  const int n_init = config.resolved_init_count();
  const Eigen::VectorXd width = config.bounds.hi - config.bounds.lo;
  Rng rng(config.seed);

  RunTrace trace;
  trace.config = config;
  trace.records.reserve(static_cast<std::size_t>(config.max_iters) + 1);

  Dataset data;
  SobolSequence init_seq(static_cast<int>(dim), rng.bits());
  for (int i = 0; i < n_init; ++i) {
    const Eigen::VectorXd x = config.bounds.lo + init_seq.next().cwiseProduct(width);
    const auto [y, noise_var] = objective(x);
    data.append(x, y, noise_var);

    IterationRecord rec;
    rec.iter = i + 1;
    rec.x = x;
    rec.y = y;
    rec.noise_var = noise_var;
    rec.is_init = true;
    blank_model_fields(rec);
    fill_truth_metrics(rec, truth, nullptr);
    trace.records.push_back(std::move(rec));
  }

  FitOptions fit_opts;
  fit_opts.box = config.bounds;
  fit_opts.jitter = config.jitter;
  const std::vector<double> grid = config.length_scale_grid.empty()
                                       ? default_length_scale_grid()
                                       : config.length_scale_grid;

  for (int t = n_init + 1; t <= config.max_iters; ++t) {
    const KernelSpec spec = fit_length_scale(config.kernel_family, data, fit_opts, grid);
    const GpPosterior gp = fit(spec, data, fit_opts);
    const Incumbent incumbent = select_incumbent(gp);

    const auto [x_next, acq_model] =
        maximize_acquisition(gp, config.acquisition, incumbent, config.bounds,
                             config.acq_opt, rng);
    const double acq_orig =
        acquisition_value_original(gp, config.acquisition, acq_model);

    IterationRecord rec;
    rec.iter = t;
    rec.x = x_next;
    rec.noise_var = 0.0;
    rec.is_init = false;
    rec.acq_value = acq_orig;
    rec.acq_value_model = acq_model;
    rec.incumbent_mean = incumbent.mean;
    rec.incumbent_mean_model = incumbent.mean_model;
    rec.incumbent_index = incumbent.index;
    rec.length_scale = gp.spec().length_scale;
    rec.output_mean = gp.output_mean();
    rec.output_std = gp.output_std();
    rec.pred_var_model = gp.variance(x_next);
    rec.incumbent_var_model = incumbent.var_model;
    rec.sigma_tilde_model = std::sqrt(sigma_tilde_sq(gp, x_next, incumbent));
    fill_truth_metrics(rec, truth, &incumbent);

    if (config.kappa > 0.0 && acq_orig < config.kappa) {
      // Terminal row: the candidate fails the threshold and is not evaluated.
      trace.records.push_back(std::move(rec));
      trace.reason = TerminationReason::kKappaReached;
      trace.terminated_at = t;
      break;
    }

    const auto [y, noise_var] = objective(x_next);
    rec.y = y;
    rec.noise_var = noise_var;
    data.append(x_next, y, noise_var);
    trace.records.push_back(std::move(rec));
  }

  const KernelSpec final_spec =
      fit_length_scale(config.kernel_family, data, fit_opts, grid);
  const GpPosterior final_gp = fit(final_spec, data, fit_opts);
  const Incumbent final_inc = select_incumbent(final_gp);
  trace.final_incumbent_x = final_inc.x;
  trace.final_incumbent_mean = final_inc.mean;
  trace.final_incumbent_index = final_inc.index;
  return trace;
}

double profit_value(double f_plus, double kappa, int t_kappa) {
  return f_plus - kappa * t_kappa;
}

ProfitResult compute_profit(const RunTrace& trace, const TruthInfo& truth,
                            double kappa) {
  if (!truth.f_max) {
    throw std::invalid_argument("compute_profit: truth oracle is empty");
  }
  if (!std::isfinite(kappa) || kappa < 0.0) {
    throw std::invalid_argument("compute_profit: kappa must be finite and >= 0");
  }

  ProfitResult result;
  for (const IterationRecord& rec : trace.records) {
    if (rec.is_init) continue;
    if (kappa > 0.0 && rec.acq_value < kappa) {
      result.t_kappa = rec.iter - 1;
      result.kappa_reached = true;
      // Rows before this one are evaluations in dataset order, so the
      // incumbent's dataset index addresses the record list directly.
      const auto idx = static_cast<std::size_t>(rec.incumbent_index);
      if (rec.incumbent_index < 0 || idx >= trace.records.size()) {
        throw std::invalid_argument("compute_profit: corrupt incumbent index");
      }
      result.incumbent_x = trace.records[idx].x;
      result.incumbent_truth = truth.f_max(result.incumbent_x);
      result.profit = profit_value(result.incumbent_truth, kappa, result.t_kappa);
      return result;
    }
  }

  int evaluated = 0;
  for (const IterationRecord& rec : trace.records) {
    if (rec.y.has_value()) ++evaluated;
  }
  result.t_kappa = evaluated;
  result.kappa_reached = false;
  if (trace.final_incumbent_x.size() == 0) {
    throw std::invalid_argument("compute_profit: trace lacks a final incumbent");
  }
  result.incumbent_x = trace.final_incumbent_x;
  result.incumbent_truth = truth.f_max(result.incumbent_x);
  result.profit = profit_value(result.incumbent_truth, kappa, result.t_kappa);
  return result;
}

}  // namespace ceibo
