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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <string>

#include "ceibo/experiment.hpp"

using namespace ceibo;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Fresh scratch directory per test case.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("ceibo_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small, fast experiment shared by the driver tests.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "benchmark": "sphere3",
    "acquisitions": ["cei", "ei"],
    "max_iters": 8,
    "init_count": 4,
    "seeds": [0, 1],
    "acq_opt": {"n_raw_per_dim": 32, "n_refine": 2, "refine_iters": 1,
                "golden_iters": 8}
  })");
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("a minimal config picks up every documented default") {
  const ExperimentConfig cfg =
      parse_experiment_config(R"({"acquisitions": ["cei"]})");
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.benchmark == "sphere3");
  CHECK(cfg.max_iters == 60);
  CHECK(cfg.init_count == -1);
  CHECK(cfg.kappa == 0.0);
  CHECK(cfg.master_seed == 20260818ULL);
  REQUIRE(cfg.seed_indices.size() == 1);
  CHECK(cfg.seed_indices[0] == 0);
  CHECK(cfg.kernel_family == KernelFamily::kSquaredExponential);
  CHECK(cfg.jitter == -1.0);
  CHECK(cfg.acq_opt.n_raw_per_dim == 512);
  CHECK(cfg.noise.kind == NoiseModel::Kind::kUniformFraction);
  CHECK(cfg.noise.value == 0.1);
  REQUIRE(cfg.acquisitions.size() == 1);
  CHECK(cfg.acquisitions[0].kind ==
        AcquisitionKind::kCorrectedExpectedImprovement);
  CHECK(cfg.out_dir.empty());
}

TEST_CASE("acquisitions accept both shorthand strings and objects") {
  const ExperimentConfig cfg = parse_experiment_config(
      R"({"acquisitions": ["pi", {"kind": "ucb", "ucb_beta": 2.5}]})");
  REQUIRE(cfg.acquisitions.size() == 2);
  CHECK(cfg.acquisitions[0].kind == AcquisitionKind::kProbabilityOfImprovement);
  CHECK(cfg.acquisitions[1].kind == AcquisitionKind::kUpperConfidenceBound);
  REQUIRE(cfg.acquisitions[1].ucb_beta.has_value());
  CHECK(*cfg.acquisitions[1].ucb_beta == 2.5);
}

TEST_CASE("serialization round-trips byte-for-byte") {
  ExperimentConfig cfg = tiny_config();
  cfg.kappa_grid = {0.5, 1.0, 2.0};
  cfg.noise = NoiseModel::fixed_std(0.25);
  const std::string s1 = serialize_experiment_config(cfg);
  const ExperimentConfig back = parse_experiment_config(s1);
  const std::string s2 = serialize_experiment_config(back);
  CHECK(s1 == s2);
  CHECK(back.benchmark == cfg.benchmark);
  CHECK(back.max_iters == cfg.max_iters);
  CHECK(back.noise.kind == NoiseModel::Kind::kFixedStd);
  CHECK(back.noise.value == 0.25);
  CHECK(back.kappa_grid == cfg.kappa_grid);
  CHECK(back.seed_indices == cfg.seed_indices);
  CHECK(back.acq_opt.n_raw_per_dim == cfg.acq_opt.n_raw_per_dim);
}

TEST_CASE("unknown keys are rejected with their field path") {
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(R"({"acquisitions": ["cei"], "bogus": 1})"),
      doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS((void)parse_experiment_config(
                           R"({"acquisitions": ["cei"],
                               "acq_opt": {"n_raw_per_dim": 4, "oops": 1}})"),
                       doctest::Contains("oops"), ConfigError);
  CHECK_THROWS_WITH_AS((void)parse_experiment_config(
                           R"({"acquisitions": ["cei"],
                               "kernel": {"family": "se", "extra": []}})"),
                       doctest::Contains("extra"), ConfigError);
}

TEST_CASE("malformed JSON reports the parser position") {
  CHECK_THROWS_WITH_AS((void)parse_experiment_config("{ nope"),
                       doctest::Contains("parse error"), ConfigError);
  CHECK_THROWS_AS((void)parse_experiment_config(""), ConfigError);
}

TEST_CASE("semantic validation catches bad configurations") {
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(R"({"acquisitions": []})"),
      doctest::Contains("acquisitions"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei", "cei"]})"),
      doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": [{"kind": "ucb"}]})"),
      doctest::Contains("ucb"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "benchmark": "branin"})"),
      doctest::Contains("benchmark"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "schema_version": 2})"),
      doctest::Contains("schema_version"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "init_count": 0})"),
      doctest::Contains("init_count"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "seeds": []})"),
      doctest::Contains("seeds"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "seeds": [-1]})"),
      doctest::Contains("seeds"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "seeds": [1.5]})"),
      doctest::Contains("integer"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"], "max_iters": 2147483648})"),
      doctest::Contains("max_iters"), ConfigError);
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(
          R"({"acquisitions": ["cei"],
              "kernel": {"length_scale_grid": [0.5, 0.5]}})"),
      doctest::Contains("increasing"), ConfigError);
}

TEST_CASE("command-line overrides replace config fields and re-validate") {
  ExperimentConfig cfg = tiny_config();
  CliOverrides o;
  o.seed_indices = {3, 4, 5};
  o.kappa = 0.7;
  o.kappa_grid = {0.1, 0.2};
  const ExperimentConfig merged = apply_overrides(cfg, o);
  CHECK(merged.seed_indices == std::vector<int>{3, 4, 5});
  CHECK(merged.kappa == 0.7);
  CHECK(merged.kappa_grid == std::vector<double>{0.1, 0.2});

  CliOverrides bad;
  bad.seed_indices = {-2};
  CHECK_THROWS_AS((void)apply_overrides(cfg, bad), ConfigError);
}

TEST_CASE("output directory resolution follows flag, config, env, default") {
  ExperimentConfig cfg = tiny_config();
  const char* saved = std::getenv("CEIBO_OUT_DIR");
  const std::string saved_copy = saved ? saved : "";

  setenv("CEIBO_OUT_DIR", "/tmp/from_env", 1);
  cfg.out_dir = "/tmp/from_cfg";
  CHECK(resolve_out_dir(cfg, "/tmp/from_flag") == "/tmp/from_flag");
  CHECK(resolve_out_dir(cfg, "") == "/tmp/from_cfg");
  cfg.out_dir.clear();
  CHECK(resolve_out_dir(cfg, "") == "/tmp/from_env");
  unsetenv("CEIBO_OUT_DIR");
  CHECK(resolve_out_dir(cfg, "") == "./ceibo_out");

  if (saved) setenv("CEIBO_OUT_DIR", saved_copy.c_str(), 1);
}

TEST_CASE("float formatting survives a parse round trip") {
  const double values[] = {0.1,
                           1.0 / 3.0,
                           3.14159265358979323846,
                           1e300,
                           5e-324,
                           -42.0,
                           0.0,
                           123456789.123456789};
  for (const double v : values) {
    const std::string s = format_float(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_float(1.0) == "1");
  CHECK(format_float(0.5) == "0.5");
}

TEST_CASE("CSV escaping follows RFC 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("with,comma") == "\"with,comma\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CHECK(csv_escape("") == "");
}

TEST_CASE("atomic writes create parents and replace contents") {
  TempDir tmp("atomic");
  const std::string path = (tmp.path / "a" / "b" / "out.txt").string();
  write_file_atomic(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
  write_file_atomic(path, "bye");
  CHECK(read_file(path) == "bye");
  CHECK(!fs::exists(path + ".tmp"));
}

TEST_CASE("trace CSV matches a golden rendering") {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RunTrace trace;
  trace.config.bounds = Box::unit(1);

  IterationRecord init;
  init.iter = 1;
  init.x = Eigen::VectorXd::Constant(1, 0.5);
  init.y = 1.25;
  init.noise_var = 0.25;
  init.is_init = true;
  init.incumbent_mean = nan;
  init.acq_value = nan;
  init.log_gap = nan;
  init.l2_gap = nan;
  trace.records.push_back(init);

  IterationRecord mid;
  mid.iter = 2;
  mid.x = Eigen::VectorXd::Constant(1, 0.75);
  mid.y = -0.5;
  mid.noise_var = 0.0625;
  mid.incumbent_mean = 1.5;
  mid.acq_value = 0.03125;
  mid.log_gap = -2.0;
  mid.l2_gap = 0.25;
  trace.records.push_back(mid);

  IterationRecord terminal;  // rejected candidate: no observation
  terminal.iter = 3;
  terminal.x = Eigen::VectorXd::Constant(1, 0.25);
  terminal.noise_var = 0.0;
  terminal.incumbent_mean = 1.5;
  terminal.acq_value = 0.015625;
  terminal.log_gap = -3.0;
  terminal.l2_gap = 0.125;
  trace.records.push_back(terminal);

  const std::string expected =
      "iter,x0,y,noise_var,incumbent_mu,acq_value,log_gap,l2_gap\n"
      "1,0.5,1.25,0.25,,,,\n"
      "2,0.75,-0.5,0.0625,1.5,0.03125,-2,0.25\n"
      "3,0.25,,,1.5,0.015625,-3,0.125\n";
  CHECK(trace_csv(trace) == expected);
}

TEST_CASE("the run driver writes one CSV per job plus a summary") {
  TempDir tmp("run");
  const ExperimentConfig cfg = tiny_config();
  const RunOutput out = cmd_run(cfg, tmp.path.string(), 1);

  REQUIRE(out.csv_paths.size() == 4);  // 2 acquisitions x 2 seeds
  for (const std::string& p : out.csv_paths) {
    CHECK(fs::exists(p));
    const std::string text = read_file(p);
    // Header plus max_iters data rows, LF line endings throughout.
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + cfg.max_iters);
    CHECK(text.find('\r') == std::string::npos);
  }
  CHECK(fs::exists(out.summary_path));
  CHECK(fs::path(out.csv_paths[0]).filename().string() ==
        "sphere3_cei_seed0.csv");

  const auto summary = nlohmann::json::parse(read_file(out.summary_path));
  CHECK(summary.at("benchmark") == "sphere3");
  CHECK(summary.at("dim") == 3);
  CHECK(summary.at("max_iters") == 8);
  CHECK(summary.at("seeds").size() == 2);
  REQUIRE(summary.contains("acquisitions"));
  bool saw_cei = false;
  for (const auto& block : summary.at("acquisitions")) {
    if (block.at("name") == "cei") {
      saw_cei = true;
      CHECK(block.at("final_log_gap").at("per_seed").size() == 2);
      CHECK(block.at("final_log_gap").contains("median"));
      CHECK(block.at("final_log_gap").contains("lo95"));
      CHECK(block.at("final_log_gap").contains("hi95"));
      CHECK(block.at("evaluations").at("median") == 8.0);
    }
  }
  CHECK(saw_cei);
}

TEST_CASE("the run driver is byte-deterministic across invocations") {
  TempDir tmp1("det1"), tmp2("det2");
  const ExperimentConfig cfg = tiny_config();
  const RunOutput a = cmd_run(cfg, tmp1.path.string(), 1);
  const RunOutput b = cmd_run(cfg, tmp2.path.string(), 1);
  REQUIRE(a.csv_paths.size() == b.csv_paths.size());
  for (size_t i = 0; i < a.csv_paths.size(); ++i) {
    CHECK(read_file(a.csv_paths[i]) == read_file(b.csv_paths[i]));
  }
  CHECK(read_file(a.summary_path) == read_file(b.summary_path));
}

TEST_CASE("the profit driver prices the kappa grid on recorded traces") {
  TempDir tmp("profit");
  ExperimentConfig cfg = tiny_config();
  cfg.acquisitions.pop_back();  // cei only
  cfg.kappa_grid = {0.5, 2.0};
  const ProfitOutput out = cmd_profit(cfg, tmp.path.string(), 1);

  const std::string table = read_file(out.table_path);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 2);  // grid x acq
  CHECK(table.rfind("kappa,acquisition,mean_profit,std_err,mean_t_kappa", 0) ==
        0);

  const std::string pairs = read_file(out.pairs_path);
  // header + |grid| * |acquisitions| * |seeds|
  CHECK(std::count(pairs.begin(), pairs.end(), '\n') == 1 + 2 * 1 * 2);
  CHECK(pairs.rfind("kappa,acquisition,seed_index,profit,t_kappa,"
                    "kappa_reached,incumbent_truth",
                    0) == 0);
}

TEST_CASE("the profit driver refuses an empty kappa grid") {
  TempDir tmp("profit_empty");
  ExperimentConfig cfg = tiny_config();
  cfg.kappa_grid.clear();
  CHECK_THROWS_AS((void)cmd_profit(cfg, tmp.path.string(), 1), ConfigError);
}

TEST_CASE("the verification battery passes and serializes its report") {
  TempDir tmp("verify");
  VerifyOptions opts;
  opts.report_path = (tmp.path / "report.json").string();
  const VerifyReport report = cmd_verify(opts);

  CHECK(report.all_pass);
  CHECK(report.first_failure().empty());
  REQUIRE(report.checks.size() == 11);
  const char* expected_names[] = {
      "tau_identity_shift", "tau_lower_bound",   "tau_upper_neg",
      "tau_upper_pos",      "info_gain_identity", "variance_sum_bound",
      "sigma_tilde",        "cei_vs_quadrature", "cei_vs_mc",
      "noiseless_cei_equals_ei", "stopping_gap_lemma"};
  for (size_t i = 0; i < report.checks.size(); ++i) {
    CHECK(report.checks[i].name == expected_names[i]);
    CHECK(report.checks[i].pass);
  }

  const auto j = nlohmann::json::parse(read_file(opts.report_path));
  CHECK(j.at("all_pass") == true);
  CHECK(j.at("checks").size() == 11);
  CHECK(j.at("checks")[0].at("name") == "tau_identity_shift");
}

TEST_CASE("fault injection flips its check and unknown names are rejected") {
  VerifyOptions opts;
  opts.inject_fault = "sigma_tilde";
  const VerifyReport report = cmd_verify(opts);
  CHECK(!report.all_pass);
  CHECK(report.first_failure() == "sigma_tilde");

  VerifyOptions bad;
  bad.inject_fault = "no_such_check";
  CHECK_THROWS_AS((void)cmd_verify(bad), ConfigError);
}

TEST_CASE("the benchmark listing covers every function plus the sampled one") {
  const auto lines = list_benchmark_lines();
  CHECK(lines.size() == 6);
  bool saw_sample = false;
  for (const auto& line : lines) {
    if (line.find("gp_sample") != std::string::npos) saw_sample = true;
  }
  CHECK(saw_sample);
}

TEST_CASE("loading a missing config file is a configuration error") {
  CHECK_THROWS_AS((void)load_experiment_config("/nonexistent/cfg.json"),
                  ConfigError);
}

}  // TEST_SUITE
