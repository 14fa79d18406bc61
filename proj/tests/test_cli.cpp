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
// End-to-end tests that drive the installed binary (path in CEIBO_BIN) through
// its real argv surface and assert on exit codes and emitted files.

#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (const char c : line) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& tag)
      : path(fs::temp_directory_path() / ("ceibo_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() { fs::remove_all(path); }

  [[nodiscard]] std::string file(const std::string& name,
                                 const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }
};

CliResult run_cli(const Scratch& scratch, const std::string& args) {
  const char* bin = std::getenv("CEIBO_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "CEIBO_BIN must point at the built binary");
  const fs::path out_file = scratch.path / "_stdout.txt";
  const fs::path err_file = scratch.path / "_stderr.txt";
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > \"" +
                          out_file.string() + "\" 2> \"" + err_file.string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

// Small enough to finish in well under a second per run.
constexpr const char* kTinyConfig = R"({
  "benchmark": "sphere3",
  "acquisitions": ["cei"],
  "max_iters": 6,
  "init_count": 3,
  "seeds": [0],
  "acq_opt": {"n_raw_per_dim": 32, "n_refine": 2, "refine_iters": 1,
              "golden_iters": 8}
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("list-benchmarks describes every objective") {
  Scratch scratch("list");
  const CliResult r = run_cli(scratch, "list-benchmarks");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("sphere3") != std::string::npos);
  CHECK(r.out.find("hartmann3") != std::string::npos);
  CHECK(r.out.find("gp_sample") != std::string::npos);
}

TEST_CASE("run emits one trace per job plus a summary") {
  Scratch scratch("run");
  const std::string cfg = scratch.file("cfg.json", kTinyConfig);
  const std::string out_dir = (scratch.path / "out").string();
  const CliResult r =
      run_cli(scratch, "run --config \"" + cfg + "\" --out \"" + out_dir + "\"");
  REQUIRE(r.exit_code == 0);

  const fs::path csv = fs::path(out_dir) / "sphere3_cei_seed0.csv";
  const fs::path summary = fs::path(out_dir) / "sphere3_summary.json";
  CHECK(fs::exists(csv));
  CHECK(fs::exists(summary));
  CHECK(r.out.find("wrote ") != std::string::npos);

  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 1 + 6);  // header + max_iters
  CHECK(rows[0] == "iter,x0,x1,x2,y,noise_var,incumbent_mu,acq_value,log_gap,l2_gap");
}

TEST_CASE("seed overrides from the flag replace the config's seed list") {
  Scratch scratch("seeds");
  const std::string cfg = scratch.file("cfg.json", kTinyConfig);
  const std::string out_dir = (scratch.path / "out").string();
  const CliResult r = run_cli(scratch, "run --config \"" + cfg +
                                           "\" --out \"" + out_dir +
                                           "\" --seeds 2");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(fs::path(out_dir) / "sphere3_cei_seed2.csv"));
  CHECK(!fs::exists(fs::path(out_dir) / "sphere3_cei_seed0.csv"));
}

TEST_CASE("an unreachable stopping threshold halts after initialization") {
  Scratch scratch("kappa");
  const std::string cfg = scratch.file("cfg.json", R"({
    "benchmark": "sphere3",
    "acquisitions": ["cei"],
    "max_iters": 10,
    "init_count": 4,
    "seeds": [0],
    "acq_opt": {"n_raw_per_dim": 32, "n_refine": 2, "refine_iters": 1,
                "golden_iters": 8}
  })");
  const std::string out_dir = (scratch.path / "out").string();
  const CliResult r = run_cli(scratch, "run --config \"" + cfg +
                                           "\" --out \"" + out_dir +
                                           "\" --kappa 1e18");
  REQUIRE(r.exit_code == 0);

  const auto rows = lines_of(slurp(fs::path(out_dir) / "sphere3_cei_seed0.csv"));
  // Header, four initialization rows, one terminal row for the rejected point.
  REQUIRE(rows.size() == 1 + 4 + 1);
  const auto last = split(rows.back(), ',');
  REQUIRE(last.size() == 10);
  CHECK(last[0] == "5");
  CHECK(last[4].empty());   // y: never evaluated
  CHECK(last[5].empty());   // noise_var
  CHECK(!last[6].empty());  // incumbent_mu from the final fit
  CHECK(!last[7].empty());  // the rejected candidate's acquisition value
}

TEST_CASE("usage and configuration errors exit with code 2") {
  Scratch scratch("errors");
  const std::string out_dir = (scratch.path / "out").string();

  const std::string broken = scratch.file("broken.json", "{ nope");
  CliResult r = run_cli(scratch, "run --config \"" + broken + "\" --out \"" +
                                     out_dir + "\"");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("configuration error") != std::string::npos);

  const std::string invalid = scratch.file(
      "invalid.json", R"({"acquisitions": ["cei"], "max_iters": 0})");
  r = run_cli(scratch, "run --config \"" + invalid + "\" --out \"" + out_dir +
                           "\"");
  CHECK(r.exit_code == 2);

  r = run_cli(scratch, "run");  // --config is required
  CHECK(r.exit_code == 2);

  r = run_cli(scratch, "frobnicate");
  CHECK(r.exit_code == 2);

  const std::string missing = (scratch.path / "does_not_exist.json").string();
  r = run_cli(scratch, "run --config \"" + missing + "\" --out \"" + out_dir +
                           "\"");
  CHECK(r.exit_code == 2);
}

TEST_CASE("profit accepts a threshold grid from the flag") {
  Scratch scratch("profit");
  const std::string cfg = scratch.file("cfg.json", kTinyConfig);
  const std::string out_dir = (scratch.path / "out").string();
  const CliResult r = run_cli(scratch, "profit --config \"" + cfg +
                                           "\" --out \"" + out_dir +
                                           "\" --kappa 0.5,2.0");
  REQUIRE(r.exit_code == 0);

  const auto table = lines_of(slurp(fs::path(out_dir) / "sphere3_profit.csv"));
  REQUIRE(table.size() == 1 + 2);  // header + |grid| x |acquisitions|
  CHECK(table[0] == "kappa,acquisition,mean_profit,std_err,mean_t_kappa");
  CHECK(split(table[1], ',')[0] == "0.5");
  CHECK(split(table[2], ',')[0] == "2");

  const auto pairs =
      lines_of(slurp(fs::path(out_dir) / "sphere3_profit_pairs.csv"));
  CHECK(pairs.size() == 1 + 2);  // one seed per grid point

  // Without a grid from config or flag, profit is a configuration error.
  const CliResult no_grid =
      run_cli(scratch, "profit --config \"" + cfg + "\" --out \"" + out_dir +
                           "\"");
  CHECK(no_grid.exit_code == 2);
}

TEST_CASE("verify exits by outcome and writes its report") {
  Scratch scratch("verify");
  const std::string report = (scratch.path / "report.json").string();

  const CliResult ok = run_cli(scratch, "verify --report \"" + report + "\"");
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("all checks passed") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  CHECK(fs::exists(report));
  CHECK(slurp(report).find("\"all_pass\": true") != std::string::npos);

  const CliResult injected =
      run_cli(scratch, "verify --inject-fault sigma_tilde");
  CHECK(injected.exit_code == 3);
  CHECK(injected.err.find("verification failed: sigma_tilde") !=
        std::string::npos);
  CHECK(injected.out.find("FAIL") != std::string::npos);

  const CliResult unknown = run_cli(scratch, "verify --inject-fault bogus");
  CHECK(unknown.exit_code == 2);
}

}  // TEST_SUITE
