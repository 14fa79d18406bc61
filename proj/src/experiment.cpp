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

#include "ceibo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ceibo/acquisition.hpp"
#include "ceibo/kernels.hpp"

namespace ceibo {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x4E;
constexpr std::uint64_t kBootstrapStream = 0xB007;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

void reject_unknown_keys(const ordered_json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_fail(path.empty() ? item.key() : path + "." + item.key(),
                  "unrecognized field");
    }
  }
}

double number_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  return j.get<double>();
}

int int_at(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < INT_MIN || v > INT_MAX) config_fail(path, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t uint64_at(const ordered_json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0) config_fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  config_fail(path, "expected a non-negative integer");
}

std::string string_at(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) config_fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> number_list_at(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) config_fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

AcquisitionSpec acquisition_at(const ordered_json& j, const std::string& path) {
  AcquisitionSpec spec;
  if (j.is_string()) {
    try {
      spec.kind = parse_acquisition(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      config_fail(path, e.what());
    }
    return spec;
  }
  if (!j.is_object()) config_fail(path, "expected a name or an object");
  reject_unknown_keys(j, path, {"kind", "ucb_beta"});
  if (!j.contains("kind")) config_fail(path + ".kind", "required");
  try {
    spec.kind = parse_acquisition(string_at(j.at("kind"), path + ".kind"));
  } catch (const std::invalid_argument& e) {
    config_fail(path + ".kind", e.what());
  }
  if (j.contains("ucb_beta")) {
    spec.ucb_beta = number_at(j.at("ucb_beta"), path + ".ucb_beta");
  }
  return spec;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (schema_version != 1) {
    config_fail("schema_version", "unsupported version");
  }
  const std::vector<std::string> names = benchmark_names();
  if (benchmark != "gp_sample" &&
      std::find(names.begin(), names.end(), benchmark) == names.end()) {
    config_fail("benchmark", "unknown benchmark '" + benchmark + "'");
  }
  if (!(noise.value >= 0.0) || !std::isfinite(noise.value)) {
    config_fail("noise.value", "must be finite and >= 0");
  }
  if (acquisitions.empty()) {
    config_fail("acquisitions", "must list at least one acquisition");
  }
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < acquisitions.size(); ++i) {
    const std::string path = "acquisitions[" + std::to_string(i) + "]";
    try {
      acquisitions[i].validate();
    } catch (const std::invalid_argument& e) {
      config_fail(path, e.what());
    }
    const std::string name = acquisition_name(acquisitions[i].kind);
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) {
      config_fail(path, "duplicate acquisition '" + name + "'");
    }
    seen.push_back(name);
  }
  if (max_iters < 1) config_fail("max_iters", "must be >= 1");
  if (init_count >= 0 && init_count > max_iters) {
    config_fail("init_count", "must be <= max_iters");
  }
  if (init_count == 0) config_fail("init_count", "must be >= 1 (or < 0 for default)");
  if (!std::isfinite(kappa) || kappa < 0.0) {
    config_fail("kappa", "must be finite and >= 0");
  }
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!std::isfinite(kappa_grid[i]) || kappa_grid[i] < 0.0) {
      config_fail("kappa_grid[" + std::to_string(i) + "]",
                  "must be finite and >= 0");
    }
  }
  if (seed_indices.empty()) config_fail("seeds", "must list at least one index");
  for (std::size_t i = 0; i < seed_indices.size(); ++i) {
    if (seed_indices[i] < 0) {
      config_fail("seeds[" + std::to_string(i) + "]", "must be >= 0");
    }
  }
  for (std::size_t i = 0; i < length_scale_grid.size(); ++i) {
    const std::string path = "kernel.length_scale_grid[" + std::to_string(i) + "]";
    if (!std::isfinite(length_scale_grid[i]) || length_scale_grid[i] <= 0.0) {
      config_fail(path, "must be finite and > 0");
    }
    if (i > 0 && length_scale_grid[i] <= length_scale_grid[i - 1]) {
      config_fail(path, "grid must be strictly increasing");
    }
  }
  if (std::isnan(jitter)) config_fail("jitter", "must not be NaN");
  try {
    acq_opt.validate();
  } catch (const std::invalid_argument& e) {
    config_fail("acq_opt", e.what());
  }
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(
      j, "",
      {"schema_version", "benchmark", "gp_sample_seed", "noise", "acquisitions",
       "max_iters", "init_count", "kappa", "kappa_grid", "master_seed", "seeds",
       "kernel", "jitter", "acq_opt", "out_dir"});

  ExperimentConfig cfg;
  if (j.contains("schema_version")) {
    cfg.schema_version = int_at(j.at("schema_version"), "schema_version");
  }
  if (j.contains("benchmark")) {
    cfg.benchmark = string_at(j.at("benchmark"), "benchmark");
  }
  if (j.contains("gp_sample_seed")) {
    cfg.gp_sample_seed = uint64_at(j.at("gp_sample_seed"), "gp_sample_seed");
  }
  if (j.contains("noise")) {
    const ordered_json& n = j.at("noise");
    if (!n.is_object()) config_fail("noise", "expected an object");
    reject_unknown_keys(n, "noise", {"kind", "value"});
    if (!n.contains("kind")) config_fail("noise.kind", "required");
    const std::string kind = string_at(n.at("kind"), "noise.kind");
    const double value =
        n.contains("value") ? number_at(n.at("value"), "noise.value") : 0.1;
    try {
      if (kind == "uniform_fraction") {
        cfg.noise = NoiseModel::uniform_fraction(value);
      } else if (kind == "fixed_std") {
        cfg.noise = NoiseModel::fixed_std(value);
      } else {
        config_fail("noise.kind", "unknown kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      config_fail("noise.value", e.what());
    }
  }
  if (j.contains("acquisitions")) {
    const ordered_json& arr = j.at("acquisitions");
    if (!arr.is_array()) config_fail("acquisitions", "expected an array");
    cfg.acquisitions.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.acquisitions.push_back(
          acquisition_at(arr[i], "acquisitions[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("max_iters")) cfg.max_iters = int_at(j.at("max_iters"), "max_iters");
  if (j.contains("init_count")) {
    cfg.init_count = int_at(j.at("init_count"), "init_count");
  }
  if (j.contains("kappa")) cfg.kappa = number_at(j.at("kappa"), "kappa");
  if (j.contains("kappa_grid")) {
    cfg.kappa_grid = number_list_at(j.at("kappa_grid"), "kappa_grid");
  }
  if (j.contains("master_seed")) {
    cfg.master_seed = uint64_at(j.at("master_seed"), "master_seed");
  }
  if (j.contains("seeds")) {
    const ordered_json& arr = j.at("seeds");
    if (!arr.is_array()) config_fail("seeds", "expected an array of integers");
    cfg.seed_indices.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      cfg.seed_indices.push_back(
          int_at(arr[i], "seeds[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("kernel")) {
    const ordered_json& k = j.at("kernel");
    if (!k.is_object()) config_fail("kernel", "expected an object");
    reject_unknown_keys(k, "kernel", {"family", "length_scale_grid"});
    if (k.contains("family")) {
      try {
        cfg.kernel_family =
            parse_kernel_family(string_at(k.at("family"), "kernel.family"));
      } catch (const std::invalid_argument& e) {
        config_fail("kernel.family", e.what());
      }
    }
    if (k.contains("length_scale_grid")) {
      cfg.length_scale_grid =
          number_list_at(k.at("length_scale_grid"), "kernel.length_scale_grid");
    }
  }
  if (j.contains("jitter")) cfg.jitter = number_at(j.at("jitter"), "jitter");
  if (j.contains("acq_opt")) {
    const ordered_json& a = j.at("acq_opt");
    if (!a.is_object()) config_fail("acq_opt", "expected an object");
    reject_unknown_keys(
        a, "acq_opt", {"n_raw_per_dim", "n_refine", "refine_iters", "golden_iters"});
    if (a.contains("n_raw_per_dim")) {
      cfg.acq_opt.n_raw_per_dim =
          int_at(a.at("n_raw_per_dim"), "acq_opt.n_raw_per_dim");
    }
    if (a.contains("n_refine")) {
      cfg.acq_opt.n_refine = int_at(a.at("n_refine"), "acq_opt.n_refine");
    }
    if (a.contains("refine_iters")) {
      cfg.acq_opt.refine_iters =
          int_at(a.at("refine_iters"), "acq_opt.refine_iters");
    }
    if (a.contains("golden_iters")) {
      cfg.acq_opt.golden_iters =
          int_at(a.at("golden_iters"), "acq_opt.golden_iters");
    }
  }
  if (j.contains("out_dir")) cfg.out_dir = string_at(j.at("out_dir"), "out_dir");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string serialize_experiment_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema_version"] = cfg.schema_version;
  j["benchmark"] = cfg.benchmark;
  j["gp_sample_seed"] = cfg.gp_sample_seed;
  j["noise"] = {
      {"kind", cfg.noise.kind == NoiseModel::Kind::kUniformFraction
                   ? "uniform_fraction"
                   : "fixed_std"},
      {"value", cfg.noise.value}};
  ordered_json acqs = ordered_json::array();
  for (const AcquisitionSpec& spec : cfg.acquisitions) {
    ordered_json a;
    a["kind"] = acquisition_name(spec.kind);
    if (spec.ucb_beta) a["ucb_beta"] = *spec.ucb_beta;
    acqs.push_back(std::move(a));
  }
  j["acquisitions"] = std::move(acqs);
  j["max_iters"] = cfg.max_iters;
  j["init_count"] = cfg.init_count;
  j["kappa"] = cfg.kappa;
  j["kappa_grid"] = cfg.kappa_grid;
  j["master_seed"] = cfg.master_seed;
  j["seeds"] = cfg.seed_indices;
  j["kernel"] = {{"family", kernel_family_name(cfg.kernel_family)},
                 {"length_scale_grid", cfg.length_scale_grid}};
  j["jitter"] = cfg.jitter;
  j["acq_opt"] = {{"n_raw_per_dim", cfg.acq_opt.n_raw_per_dim},
                  {"n_refine", cfg.acq_opt.n_refine},
                  {"refine_iters", cfg.acq_opt.refine_iters},
                  {"golden_iters", cfg.acq_opt.golden_iters}};
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("CEIBO_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "./ceibo_out";
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const CliOverrides& o) {
  if (!o.seed_indices.empty()) cfg.seed_indices = o.seed_indices;
  if (o.kappa) cfg.kappa = *o.kappa;
  if (!o.kappa_grid.empty()) cfg.kappa_grid = o.kappa_grid;
  cfg.validate();
  return cfg;
}

// ---- Emission helpers -------------------------------------------------------

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

// NaN and missing observations render as empty CSV fields.
std::string csv_number(double v) {
  return std::isnan(v) ? std::string() : format_float(v);
}

}  // namespace

std::string trace_csv(const RunTrace& trace) {
  const auto dim = trace.config.bounds.dim();
  std::ostringstream out;
  out << "iter";
  for (Eigen::Index d = 0; d < dim; ++d) out << ",x" << d;
  out << ",y,noise_var,incumbent_mu,acq_value,log_gap,l2_gap\n";
  for (const IterationRecord& rec : trace.records) {
    out << rec.iter;
    for (Eigen::Index d = 0; d < dim; ++d) out << ',' << format_float(rec.x(d));
    out << ',' << (rec.y ? format_float(*rec.y) : std::string());
    out << ',' << (rec.y ? format_float(rec.noise_var) : std::string());
    out << ',' << csv_number(rec.incumbent_mean);
    out << ',' << csv_number(rec.acq_value);
    out << ',' << csv_number(rec.log_gap);
    out << ',' << csv_number(rec.l2_gap);
    out << '\n';
  }
  return out.str();
}

// ---- Run orchestration ------------------------------------------------------

namespace {

BenchmarkFunction materialize_benchmark(const ExperimentConfig& cfg) {
  if (cfg.benchmark == "gp_sample") {
    return gp_sampled_function(cfg.gp_sample_seed);
  }
  return make_benchmark(cfg.benchmark);
}

TruthInfo truth_from(const BenchmarkFunction& fn) {
  TruthInfo truth;
  const auto f = fn.f;
  truth.f_max = [f](const Eigen::VectorXd& x) { return -f(x); };
  truth.f_max_opt = -fn.optimum_value;
  truth.x_opt = fn.optimizer;
  return truth;
}

RunConfig make_run_config(const ExperimentConfig& cfg, const BenchmarkFunction& fn,
                          const AcquisitionSpec& acq, int seed_index,
                          double kappa) {
  RunConfig rc;
  rc.bounds = fn.bounds;
  rc.max_iters = cfg.max_iters;
  rc.init_count = cfg.init_count;
  rc.kappa = kappa;
  rc.acquisition = acq;
  rc.kernel_family = cfg.kernel_family;
  rc.length_scale_grid = cfg.length_scale_grid;
  rc.jitter = cfg.jitter;
  rc.seed = split_seed(cfg.master_seed, static_cast<std::uint64_t>(seed_index));
  rc.acq_opt = cfg.acq_opt;
  try {
    rc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

Objective make_objective(const BenchmarkFunction& fn, const NoiseModel& noise,
                         std::uint64_t run_seed) {
  auto rng = std::make_shared<Rng>(split_seed(run_seed, kNoiseStream));
  return [fn, noise, rng](const Eigen::VectorXd& x) {
    const auto [y, noise_var] = noisy_eval(fn, noise, x, *rng);
    return std::make_pair(-y, noise_var);
  };
}

std::vector<CompletedRun> execute_runs(const ExperimentConfig& cfg,
                                       const BenchmarkFunction& fn,
                                       const TruthInfo& truth, double kappa,
                                       int parallel) {
  struct Job {
    AcquisitionSpec acq;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (const AcquisitionSpec& acq : cfg.acquisitions) {
    for (const int seed_index : cfg.seed_indices) {
      jobs.push_back({acq, seed_index});
    }
  }

  std::vector<CompletedRun> runs(jobs.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mu;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      try {
        const Job& job = jobs[i];
        const RunConfig rc = make_run_config(cfg, fn, job.acq, job.seed_index, kappa);
        const Objective obj = make_objective(fn, cfg.noise, rc.seed);
        CompletedRun done;
        done.acquisition = acquisition_name(job.acq.kind);
        done.seed_index = job.seed_index;
        done.trace = run_bo(rc, obj, &truth);
        runs[i] = std::move(done);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(parallel, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) {
    throw std::runtime_error("run failed: " + first_error);
  }
  return runs;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

// 95% percentile band of the median under resampling with replacement.
std::pair<double, double> bootstrap_median_band(const std::vector<double>& values,
                                                Rng& rng, int n_resamples = 1000) {
  if (values.size() < 2) {
    const double v = values.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : values.front();
    return {v, v};
  }
  std::vector<double> medians(static_cast<std::size_t>(n_resamples));
  std::vector<double> sample(values.size());
  for (int r = 0; r < n_resamples; ++r) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto pick = static_cast<std::size_t>(rng.uniform() *
                                                 static_cast<double>(values.size()));
      sample[i] = values[std::min(pick, values.size() - 1)];
    }
    medians[static_cast<std::size_t>(r)] = median_of(sample);
  }
  std::sort(medians.begin(), medians.end());
  return {percentile_sorted(medians, 0.025), percentile_sorted(medians, 0.975)};
}

ordered_json stat_block(const std::vector<double>& per_seed, Rng& rng) {
  ordered_json block;
  block["per_seed"] = per_seed;
  block["median"] = median_of(per_seed);
  const auto [lo, hi] = bootstrap_median_band(per_seed, rng);
  block["lo95"] = lo;
  block["hi95"] = hi;
  return block;
}

double final_metric(const RunTrace& trace, double IterationRecord::* field) {
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const IterationRecord& rec : trace.records) {
    const double v = rec.*field;
    if (std::isfinite(v)) last = v;
  }
  return last;
}

int evaluation_count(const RunTrace& trace) {
  int n = 0;
  for (const IterationRecord& rec : trace.records) {
    if (rec.y.has_value()) ++n;
  }
  return n;
}

}  // namespace

RunOutput cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
                  int parallel) {
  cfg.validate();
  const BenchmarkFunction fn = materialize_benchmark(cfg);
  const TruthInfo truth = truth_from(fn);
  const std::vector<CompletedRun> runs =
      execute_runs(cfg, fn, truth, cfg.kappa, parallel);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  RunOutput output;
  for (const CompletedRun& run : runs) {
    const std::string path = (fs::path(out_dir) /
                              (fn.name + "_" + run.acquisition + "_seed" +
                               std::to_string(run.seed_index) + ".csv"))
                                 .string();
    write_file_atomic(path, trace_csv(run.trace));
    output.csv_paths.push_back(path);
  }

  Rng boot_rng(split_seed(cfg.master_seed, kBootstrapStream));
  ordered_json summary;
  summary["benchmark"] = fn.name;
  summary["dim"] = fn.dim;
  summary["optimum_value"] = fn.optimum_value;
  summary["max_iters"] = cfg.max_iters;
  summary["kappa"] = cfg.kappa;
  summary["seeds"] = cfg.seed_indices;
  ordered_json acq_blocks = ordered_json::array();
  for (const AcquisitionSpec& acq : cfg.acquisitions) {
    const std::string name = acquisition_name(acq.kind);
    std::vector<double> final_log_gap, final_l2_gap, evals;
    std::vector<const RunTrace*> traces;
    for (const CompletedRun& run : runs) {
      if (run.acquisition != name) continue;
      traces.push_back(&run.trace);
      final_log_gap.push_back(final_metric(run.trace, &IterationRecord::log_gap));
      final_l2_gap.push_back(final_metric(run.trace, &IterationRecord::l2_gap));
      evals.push_back(static_cast<double>(evaluation_count(run.trace)));
    }
    ordered_json block;
    block["name"] = name;
    block["final_log_gap"] = stat_block(final_log_gap, boot_rng);
    block["final_l2_gap"] = stat_block(final_l2_gap, boot_rng);
    block["evaluations"] = stat_block(evals, boot_rng);
    ordered_json by_iter = ordered_json::array();
    for (int t = 1; t <= cfg.max_iters; ++t) {
      std::vector<double> at_t;
      for (const RunTrace* trace : traces) {
        for (const IterationRecord& rec : trace->records) {
          if (rec.iter == t && std::isfinite(rec.log_gap)) {
            at_t.push_back(rec.log_gap);
          }
        }
      }
      if (at_t.empty()) {
        by_iter.push_back(nullptr);
      } else {
        by_iter.push_back(median_of(at_t));
      }
    }
    block["median_log_gap_by_iter"] = std::move(by_iter);
    acq_blocks.push_back(std::move(block));
  }
  summary["acquisitions"] = std::move(acq_blocks);

  output.summary_path =
      (fs::path(out_dir) / (fn.name + "_summary.json")).string();
  write_file_atomic(output.summary_path, summary.dump(2) + "\n");
  return output;
}

ProfitOutput cmd_profit(const ExperimentConfig& cfg, const std::string& out_dir,
                        int parallel) {
  cfg.validate();
  if (cfg.kappa_grid.empty()) {
    config_fail("kappa_grid", "profit requires a non-empty grid");
  }
  const BenchmarkFunction fn = materialize_benchmark(cfg);
  const TruthInfo truth = truth_from(fn);
  // Threshold zero records the full trajectory; every grid kappa is then an
  // exact replay of the stopping rule on the recorded prefix.
  const std::vector<CompletedRun> runs = execute_runs(cfg, fn, truth, 0.0, parallel);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::ostringstream table;
  std::ostringstream pairs;
  table << "kappa,acquisition,mean_profit,std_err,mean_t_kappa\n";
  pairs << "kappa,acquisition,seed_index,profit,t_kappa,kappa_reached,"
           "incumbent_truth\n";
  for (const double kappa : cfg.kappa_grid) {
    for (const AcquisitionSpec& acq : cfg.acquisitions) {
      const std::string name = acquisition_name(acq.kind);
      std::vector<double> profits;
      double t_sum = 0.0;
      for (const CompletedRun& run : runs) {
        if (run.acquisition != name) continue;
        const ProfitResult res = compute_profit(run.trace, truth, kappa);
        profits.push_back(res.profit);
        t_sum += res.t_kappa;
        pairs << format_float(kappa) << ',' << name << ',' << run.seed_index
              << ',' << format_float(res.profit) << ',' << res.t_kappa << ','
              << (res.kappa_reached ? 1 : 0) << ','
              << format_float(res.incumbent_truth) << '\n';
      }
      const auto n = static_cast<double>(profits.size());
      double mean = 0.0;
      for (const double p : profits) mean += p;
      mean /= n;
      double ss = 0.0;
      for (const double p : profits) ss += (p - mean) * (p - mean);
      const double std_err = n > 1.0 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      table << format_float(kappa) << ',' << name << ',' << format_float(mean)
            << ',' << format_float(std_err) << ',' << format_float(t_sum / n)
            << '\n';
    }
  }

  ProfitOutput output;
  output.table_path = (fs::path(out_dir) / (fn.name + "_profit.csv")).string();
  output.pairs_path =
      (fs::path(out_dir) / (fn.name + "_profit_pairs.csv")).string();
  write_file_atomic(output.table_path, table.str());
  write_file_atomic(output.pairs_path, pairs.str());
  return output;
}

// ---- Verification battery ---------------------------------------------------

namespace {

CheckResult make_check(std::string name, double lhs, double rhs, double tol,
                       std::string note = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = r.margin >= -tol;
  r.note = std::move(note);
  return r;
}

Dataset random_dataset(int n, int d, double noise_lo, double noise_hi, Rng& rng) {
  Dataset data;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x(k) = rng.uniform();
    const double y = std::sin(3.0 * x.sum()) + 0.2 * x.squaredNorm();
    const double sd = rng.uniform(noise_lo, noise_hi);
    data.append(x, y + sd * rng.gaussian(), sd * sd);
  }
  return data;
}

}  // namespace

std::string VerifyReport::first_failure() const {
  for (const CheckResult& c : checks) {
    if (!c.pass) return c.name;
  }
  return {};
}

VerifyReport cmd_verify(const VerifyOptions& opts) {
  VerifyReport report;
  Rng rng(0xCE1B0ULL);

  // tau identities on a dense grid.
  {
    double worst_shift = 0.0, worst_lower = 0.0, min_tau = 1e300;
    double worst_neg = 0.0, worst_pos = 0.0;
    for (double z = -10.0; z <= 10.0 + 1e-9; z += 0.01) {
      const double t = tau(z);
      worst_shift = std::max(worst_shift, std::abs(t - (z + tau(-z))));
      worst_lower = std::max(worst_lower, std::max(z, 0.0) - t);
      min_tau = std::min(min_tau, t);
      if (z <= 0.0) worst_neg = std::max(worst_neg, t - normal_pdf(z));
      if (z >= 0.0) worst_pos = std::max(worst_pos, t - (z + normal_pdf(z)));
    }
    report.checks.push_back(make_check("tau_identity_shift", worst_shift, 0.0,
                                       1e-12, "max |tau(z) - z - tau(-z)|"));
    report.checks.push_back(make_check("tau_lower_bound", worst_lower, 0.0, 1e-12,
                                       "max (max(z,0) - tau(z)); positivity min " +
                                           format_float(min_tau)));
    report.checks.push_back(make_check("tau_upper_neg", worst_neg, 0.0, 1e-12,
                                       "max (tau(z) - pdf(z)) for z <= 0"));
    report.checks.push_back(make_check("tau_upper_pos", worst_pos, 0.0, 1e-12,
                                       "max (tau(z) - z - pdf(z)) for z >= 0"));
  }

  // Sequential and log-det information gains agree.
  {
    const int T = 12;
    Eigen::MatrixXd X(T, 2);
    Eigen::VectorXd noise(T);
    for (int i = 0; i < T; ++i) {
      X(i, 0) = rng.uniform();
      X(i, 1) = rng.uniform();
      const double sd = rng.uniform(0.3, 1.5);
      noise(i) = sd * sd;
    }
    const KernelSpec spec{KernelFamily::kSquaredExponential, 0.4, 1.0};
    const InfoGainReport ig = make_info_gain_report(spec, X, noise, 1e-12);
    report.checks.push_back(make_check(
        "info_gain_identity", std::abs(ig.sequential_value - ig.logdet_value),
        0.0, 1e-8, "sequential vs log-det"));
  }

  // Summed variances against the gain-ratio bound.
  {
    const int T = 15;
    Eigen::MatrixXd X(T, 2);
    Eigen::VectorXd noise(T);
    for (int i = 0; i < T; ++i) {
      X(i, 0) = rng.uniform();
      X(i, 1) = rng.uniform();
      const double sd = rng.uniform(0.2, 1.2);
      noise(i) = sd * sd;
    }
    std::vector<Eigen::VectorXd> probes;
    for (int p = 0; p < 10; ++p) {
      Eigen::VectorXd probe(2);
      probe << rng.uniform(), rng.uniform();
      probes.push_back(probe);
    }
    const KernelSpec spec{KernelFamily::kSquaredExponential, 0.35, 1.0};
    const auto results = check_variance_sum_bound(spec, X, noise, probes, 1e-12);
    double worst = 0.0;
    bool all = true;
    for (const CheckResult& r : results) {
      worst = std::min(worst, r.margin);
      all = all && r.pass;
    }
    CheckResult r = make_check("variance_sum_bound", -worst, 0.0, 1e-10,
                               "worst probe margin");
    r.pass = all;
    report.checks.push_back(std::move(r));
  }

  // Corrected variance stays nonnegative and within the triangle bound.
  {
    const Dataset data = random_dataset(18, 2, 0.2, 1.0, rng);
    FitOptions fo;
    fo.box = Box::unit(2);
    const GpPosterior gp =
        fit(KernelSpec{KernelFamily::kSquaredExponential, 0.3, 1.0}, data, fo);
    const Incumbent inc = select_incumbent(gp);
    double min_st2 = 1e300;
    double worst_triangle = 0.0;
    for (int q = 0; q < 200; ++q) {
      Eigen::VectorXd x(2);
      x << rng.uniform(), rng.uniform();
      const double st2 = sigma_tilde_sq(gp, x, inc);
      min_st2 = std::min(min_st2, st2);
      const double sx = std::sqrt(std::max(gp.variance(x), 0.0));
      const double sp = std::sqrt(std::max(inc.var_model, 0.0));
      worst_triangle =
          std::max(worst_triangle, st2 - (sx + sp) * (sx + sp));
    }
    if (opts.inject_fault == "sigma_tilde") {
      // Fault seam: emulate a disabled clamp by feeding a negative variance
      // straight into the check.
      min_st2 = std::min(min_st2, -1e-3);
    }
    CheckResult r = make_check("sigma_tilde", -min_st2, 0.0, 1e-12,
                               "min corrected variance; triangle slack " +
                                   format_float(worst_triangle));
    r.pass = r.pass && worst_triangle <= 1e-9;
    report.checks.push_back(std::move(r));
  }

  // Closed form vs adaptive quadrature.
  {
    double worst = 0.0;
    for (int c = 0; c < 20; ++c) {
      const double u = rng.uniform(-3.0, 3.0);
      const double st = rng.uniform(0.05, 2.0);
      worst = std::max(worst,
                       std::abs(corrected_ei(u, st) - corrected_ei_quadrature(u, st)));
    }
    report.checks.push_back(
        make_check("cei_vs_quadrature", worst, 0.0, 1e-8, "20 (u, sigma) pairs"));
  }

  // Closed form vs Monte Carlo under the joint posterior.
  {
    const Dataset data = random_dataset(15, 2, 0.3, 1.0, rng);
    FitOptions fo;
    fo.box = Box::unit(2);
    const GpPosterior gp =
        fit(KernelSpec{KernelFamily::kSquaredExponential, 0.35, 1.0}, data, fo);
    const Incumbent inc = select_incumbent(gp);
    Eigen::VectorXd x(2);
    x << 0.31, 0.77;
    const double mu_x = gp.mean_model(x);
    const double var_x = gp.variance(x);
    const double cov = gp.covariance(x, inc.x);
    const double st = std::sqrt(sigma_tilde_sq(gp, x, inc));
    const double closed = corrected_ei(mu_x - inc.mean_model, st);
    const auto [mc, se] =
        corrected_ei_mc(mu_x, inc.mean_model, var_x, inc.var_model, cov, 400000, rng);
    report.checks.push_back(make_check("cei_vs_mc", std::abs(closed - mc),
                                       4.0 * se, 0.0,
                                       "|closed - MC| within 4 standard errors"));
  }

  // With exact observations the corrected and plug-in rules coincide.
  {
    Dataset data;
    Rng noiseless_rng(77);
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd x(2);
      x << noiseless_rng.uniform(), noiseless_rng.uniform();
      data.append(x, std::cos(4.0 * x(0)) + x(1), 0.0);
    }
    FitOptions fo;
    fo.box = Box::unit(2);
    fo.jitter = 1e-12;
    const GpPosterior gp =
        fit(KernelSpec{KernelFamily::kSquaredExponential, 0.4, 1.0}, data, fo);
    const Incumbent inc = select_incumbent(gp);
    double worst = 0.0;
    for (int q = 0; q < 100; ++q) {
      Eigen::VectorXd x(2);
      x << noiseless_rng.uniform(), noiseless_rng.uniform();
      const double u = gp.mean_model(x) - inc.mean_model;
      const double cei = corrected_ei(u, std::sqrt(sigma_tilde_sq(gp, x, inc)));
      const double ei = plugin_ei(u, std::sqrt(std::max(gp.variance(x), 0.0)));
      worst = std::max(worst, std::abs(cei - ei));
    }
    report.checks.push_back(make_check("noiseless_cei_equals_ei", worst, 0.0,
                                       1e-9, "100 queries, zero-noise fit"));
  }

  // Stopping-gap inequalities on a fresh seeded run.
  {
    const BenchmarkFunction fn = make_benchmark("sphere3");
    const TruthInfo truth = truth_from(fn);
    RunConfig rc;
    rc.bounds = fn.bounds;
    rc.max_iters = 16;
    rc.init_count = 9;
    rc.kappa = 0.0;
    rc.acquisition.kind = AcquisitionKind::kCorrectedExpectedImprovement;
    rc.seed = split_seed(0xCE1B0ULL, 7);
    rc.acq_opt.n_raw_per_dim = 128;
    rc.acq_opt.n_refine = 3;
    const Objective obj = make_objective(fn, NoiseModel::uniform_fraction(0.1),
                                         rc.seed);
    const RunTrace trace = run_bo(rc, obj, &truth);
    const GapLemmaReport gaps = check_stopping_gap_lemma(trace, 0.01);
    CheckResult r = make_check(
        "stopping_gap_lemma",
        static_cast<double>(gaps.gap_violations + gaps.tau_violations), 0.0, 0.0,
        "checked " + std::to_string(gaps.checked) + " iterations; constant gap " +
            format_float(gaps.constant_discrepancy));
    r.pass = gaps.checked > 0 && gaps.gap_violations == 0 && gaps.tau_violations == 0;
    report.checks.push_back(std::move(r));
  }

  if (!opts.inject_fault.empty()) {
    bool known = opts.inject_fault == "sigma_tilde";
    for (CheckResult& c : report.checks) {
      if (c.name == opts.inject_fault && opts.inject_fault != "sigma_tilde") {
        c.pass = false;
        c.note += (c.note.empty() ? "" : "; ") + std::string("fault injected");
        known = true;
      }
    }
    if (!known) {
      throw ConfigError("unknown check for fault injection: " + opts.inject_fault);
    }
  }

  report.all_pass = true;
  for (const CheckResult& c : report.checks) report.all_pass &= c.pass;

  if (!opts.report_path.empty()) {
    write_file_atomic(opts.report_path, verify_report_json(report));
  }
  return report;
}

std::string verify_report_json(const VerifyReport& report) {
  ordered_json j;
  j["all_pass"] = report.all_pass;
  ordered_json checks = ordered_json::array();
  for (const CheckResult& c : report.checks) {
    ordered_json jc;
    jc["name"] = c.name;
    jc["lhs"] = c.lhs;
    jc["rhs"] = c.rhs;
    jc["margin"] = c.margin;
    jc["pass"] = c.pass;
    jc["note"] = c.note;
    checks.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks);
  return j.dump(2) + "\n";
}

std::vector<std::string> list_benchmark_lines() {
  std::vector<std::string> lines;
  for (const std::string& name : benchmark_names()) {
    const BenchmarkFunction fn = make_benchmark(name);
    std::ostringstream line;
    line << fn.name << "  dim=" << fn.dim << "  box=[" << format_float(fn.bounds.lo(0))
         << ", " << format_float(fn.bounds.hi(0)) << "]^" << fn.dim
         << "  min=" << format_float(fn.optimum_value)
         << "  range~" << format_float(fn.range_estimate);
    lines.push_back(line.str());
  }
  lines.push_back(
      "gp_sample  dim=1  box=[0, 60]  seeded draw from the unit SE prior "
      "(length 3), 4000-point grid");
  return lines;
}

}  // namespace ceibo
