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

#include "ceibo/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "ceibo/sobol.hpp"

namespace ceibo {

namespace {

constexpr double kPi = std::numbers::pi;

double hartmann3(const Eigen::VectorXd& x) {
  static const double A[4][3] = {
      {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static const double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                 {0.4699, 0.4387, 0.7470},
                                 {0.1091, 0.8732, 0.5547},
                                 {0.0381, 0.5743, 0.8828}};
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double d = x(j) - P[i][j];
      e += A[i][j] * d * d;
    }
    sum += alpha[i] * std::exp(-e);
  }
  return -sum;
}

double griewank(const Eigen::VectorXd& x) {
  double sum = 0.0, prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) / 4000.0;
    prod *= std::cos(x(i) / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum - prod + 1.0;
}

double levy(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  auto w = [&](Eigen::Index i) { return 1.0 + (x(i) - 1.0) / 4.0; };
  const double s1 = std::sin(kPi * w(0));
  double f = s1 * s1;
  for (Eigen::Index i = 0; i < d - 1; ++i) {
    const double wi = w(i);
    const double s = std::sin(kPi * wi + 1.0);
    f += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
  }
  const double wd = w(d - 1);
  const double s2 = std::sin(2.0 * kPi * wd);
  f += (wd - 1.0) * (wd - 1.0) * (1.0 + s2 * s2);
  return f;
}

// d=5 variant of the classical four-index Powell groups: the group starting
// at coordinate g wraps around modulo d.
double powell_wrapped(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  double f = 0.0;
  for (Eigen::Index g = 0; g < d; ++g) {
    const double a = x(g);
    const double b = x((g + 1) % d);
    const double c = x((g + 2) % d);
    const double e = x((g + 3) % d);
    const double t1 = a + 10.0 * b;
    const double t2 = c - e;
    const double t3 = b - 2.0 * c;
    const double t4 = a - e;
    f += t1 * t1 + 5.0 * t2 * t2 + t3 * t3 * t3 * t3 + 10.0 * t4 * t4 * t4 * t4;
  }
  return f;
}

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

Box make_box(int dim, double lo, double hi) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(dim, lo);
  b.hi = Eigen::VectorXd::Constant(dim, hi);
  return b;
}

// max f - min f over a 1e5-point Sobol scan, cached per benchmark.
double scanned_range(const std::string& name, const BenchmarkFunction& fn) {
  static std::unordered_map<std::string, double> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
  }
  SobolSequence seq(fn.dim);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const Eigen::VectorXd width = fn.bounds.hi - fn.bounds.lo;
  for (int i = 0; i < 100000; ++i) {
    const Eigen::VectorXd u = seq.next();
    const double v = fn.f(fn.bounds.lo + u.cwiseProduct(width));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(name, range);
  return range;
}

}  // namespace

double eval_benchmark(const BenchmarkFunction& fn, const Eigen::VectorXd& x) {
  if (!fn.bounds.contains(x, 1e-12)) {
    std::ostringstream msg;
    msg << "eval_benchmark(" << fn.name << "): point outside bounds";
    throw std::invalid_argument(msg.str());
  }
  return fn.f(x);
}

BenchmarkFunction make_benchmark(const std::string& name) {
  BenchmarkFunction fn;
  fn.name = name;
  if (name == "hartmann3") {
    fn.id = BenchmarkId::kHartmann3;
    fn.dim = 3;
    fn.bounds = make_box(3, 0.0, 1.0);
    fn.f = hartmann3;
    fn.optimum_value = -3.86278214782076;
    fn.optimizer = Eigen::Vector3d(0.114614, 0.555649, 0.852547);
  } else if (name == "griewank6") {
    fn.id = BenchmarkId::kGriewank6;
    fn.dim = 6;
    fn.bounds = make_box(6, -600.0, 600.0);
    fn.f = griewank;
    fn.optimum_value = 0.0;
    fn.optimizer = Eigen::VectorXd::Zero(6);
  } else if (name == "levy4") {
    fn.id = BenchmarkId::kLevy4;
    fn.dim = 4;
    fn.bounds = make_box(4, -10.0, 10.0);
    fn.f = levy;
    fn.optimum_value = 0.0;
    fn.optimizer = Eigen::VectorXd::Ones(4);
  } else if (name == "powell5") {
    fn.id = BenchmarkId::kPowell5;
    fn.dim = 5;
    fn.bounds = make_box(5, -4.0, 5.0);
    fn.f = powell_wrapped;
    fn.optimum_value = 0.0;
    fn.optimizer = Eigen::VectorXd::Zero(5);
  } else if (name == "sphere3") {
    fn.id = BenchmarkId::kSphere3;
    fn.dim = 3;
    fn.bounds = make_box(3, -5.12, 5.12);
    fn.f = sphere;
    fn.optimum_value = 0.0;
    fn.optimizer = Eigen::VectorXd::Zero(3);
  } else {
    throw std::invalid_argument("unknown benchmark: " + name);
  }
  fn.range_estimate = scanned_range(name, fn);
  return fn;
}

std::vector<std::string> benchmark_names() {
  return {"hartmann3", "griewank6", "levy4", "powell5", "sphere3"};
}

namespace {

// One Cholesky factor per grid size, shared across sample seeds.
const Eigen::MatrixXd& sample_grid_factor(int grid_points) {
  static std::unordered_map<int, Eigen::MatrixXd> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(grid_points);
  if (it != cache.end()) return it->second;

  Eigen::MatrixXd X(grid_points, 1);
  for (int i = 0; i < grid_points; ++i) {
    X(i, 0) = 60.0 * i / (grid_points - 1);
  }
  const KernelSpec spec{KernelFamily::kSquaredExponential, 3.0, 1.0};
  Eigen::MatrixXd K = kernel_matrix(spec, X);
  // The dense SE grid is numerically rank-deficient; a jitter floor keeps the
  // factorization alive without visibly distorting the samples.
  for (double j = 1e-10; j <= 1e-4; j *= 10.0) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += j;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      return cache.emplace(grid_points, Eigen::MatrixXd(llt.matrixL()))
          .first->second;
    }
  }
  throw NumericalError("gp_sampled_function: grid kernel failed to factor");
}

BenchmarkFunction make_gp_sample(Eigen::VectorXd grid_x, Eigen::VectorXd values,
                                 const std::string& name) {
  const int n = static_cast<int>(grid_x.size());
  BenchmarkFunction fn;
  fn.id = BenchmarkId::kGpSampled;
  fn.name = name;
  fn.dim = 1;
  fn.bounds.lo = Eigen::VectorXd::Constant(1, grid_x(0));
  fn.bounds.hi = Eigen::VectorXd::Constant(1, grid_x(n - 1));
  const double spacing = (grid_x(n - 1) - grid_x(0)) / (n - 1);
  const double x0 = grid_x(0);
  auto vals = std::make_shared<Eigen::VectorXd>(std::move(values));
  fn.f = [vals, x0, spacing, n](const Eigen::VectorXd& x) {
    const auto idx = static_cast<Eigen::Index>(
        std::clamp(std::lround((x(0) - x0) / spacing), 0L, long(n - 1)));
    return (*vals)(idx);
  };
  Eigen::Index arg = 0;
  fn.optimum_value = vals->minCoeff(&arg);
  fn.optimizer = Eigen::VectorXd::Constant(1, grid_x(arg));
  fn.range_estimate = vals->maxCoeff() - vals->minCoeff();
  fn.grid_x = std::move(grid_x);
  fn.grid_values = *vals;
  return fn;
}

}  // namespace

BenchmarkFunction gp_sampled_function(std::uint64_t seed, int grid_points) {
  if (grid_points < 2) {
    throw std::invalid_argument("gp_sampled_function: need at least 2 grid points");
  }
  const Eigen::MatrixXd& L = sample_grid_factor(grid_points);
  Rng rng(split_seed(seed, 0x67705A11ULL));
  Eigen::VectorXd z(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    z(i) = rng.gaussian();
  }
  Eigen::VectorXd values = L.triangularView<Eigen::Lower>() * z;
  if (values.cwiseAbs().maxCoeff() > 8.0) {
    std::fprintf(stderr,
                 "gp_sampled_function: sample %llu exceeds +-8 (max |f| = %g); "
                 "consider a different seed\n",
                 static_cast<unsigned long long>(seed),
                 values.cwiseAbs().maxCoeff());
  }
  Eigen::VectorXd grid_x(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    grid_x(i) = 60.0 * i / (grid_points - 1);
  }
  return make_gp_sample(std::move(grid_x), std::move(values),
                        "gp_sample" + std::to_string(seed));
}

void save_gp_sample(const BenchmarkFunction& fn, const std::string& path) {
  if (fn.id != BenchmarkId::kGpSampled || fn.grid_x.size() == 0) {
    throw std::invalid_argument("save_gp_sample: not a grid-backed function");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_gp_sample: cannot open " + path);
  }
  out << "x,value\n";
  char buf[128];
  for (Eigen::Index i = 0; i < fn.grid_x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", fn.grid_x(i),
                  fn.grid_values(i));
    out << buf;
  }
  if (!out) {
    throw std::runtime_error("save_gp_sample: write failed for " + path);
  }
}

BenchmarkFunction load_gp_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_gp_sample: cannot open " + path);
  }
  std::string header;
  std::getline(in, header);
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("load_gp_sample: malformed row: " + line);
    }
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) {
    throw std::runtime_error("load_gp_sample: fewer than 2 grid rows");
  }
  Eigen::VectorXd grid_x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
  Eigen::VectorXd values = Eigen::Map<Eigen::VectorXd>(vs.data(), vs.size());
  return make_gp_sample(std::move(grid_x), std::move(values), "gp_sample_file");
}

NoiseModel NoiseModel::uniform_fraction(double p) {
  if (p < 0.0 || !std::isfinite(p)) {
    throw std::invalid_argument("NoiseModel: fraction must be >= 0");
  }
  return {Kind::kUniformFraction, p};
}

NoiseModel NoiseModel::fixed_std(double s) {
  if (s < 0.0 || !std::isfinite(s)) {
    throw std::invalid_argument("NoiseModel: std must be >= 0");
  }
  return {Kind::kFixedStd, s};
}

double NoiseModel::draw_std(double range_estimate, Rng& rng) const {
  switch (kind) {
    case Kind::kUniformFraction:
      // Uniform on (0, p * range]; excludes zero so every observation stays
      // genuinely noisy under a positive fraction.
      return value * range_estimate * rng.uniform_pos();
    case Kind::kFixedStd:
      return value;
  }
  throw std::invalid_argument("NoiseModel: unknown kind");
}

std::pair<double, double> noisy_eval(const BenchmarkFunction& fn,
                                     const NoiseModel& noise,
                                     const Eigen::VectorXd& x, Rng& rng) {
  const double f = eval_benchmark(fn, x);
  const double sd = noise.draw_std(fn.range_estimate, rng);
  if (sd == 0.0) {
    return {f, 0.0};
  }
  return {f + sd * rng.gaussian(), sd * sd};
}

double metric_log_gap(const BenchmarkFunction& fn, const Eigen::VectorXd& x_plus) {
  const double gap = fn.f(x_plus) - fn.optimum_value;
  return std::log10(std::max(gap, 1e-12));
}

double metric_l2_gap(const BenchmarkFunction& fn, const Eigen::VectorXd& x_plus) {
  return (x_plus - fn.optimizer).norm();
}

}  // namespace ceibo
