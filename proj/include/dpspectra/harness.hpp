//
// Copyright 2026 The dpspectra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Seeded Monte-Carlo experiments comparing the private spectral estimator
// with the baselines on the spiked model (settings S1a-S4) or on a
// user-supplied data matrix, plus CSV output and per-grid-point summaries.

#ifndef DPSPECTRA_HARNESS_HPP_
#define DPSPECTRA_HARNESS_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "dpspectra/baselines.hpp"
#include "dpspectra/data_io.hpp"
#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/mechanisms.hpp"
#include "dpspectra/mp_law.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/sensitivity.hpp"
#include "dpspectra/spiked_model.hpp"
#include "dpspectra/stats.hpp"

namespace dpspectra {

enum class Setting { kS1a, kS1b, kS2a, kS2b, kS3, kS4, kCustom };
enum class Method { kOurs, kDpOja, kDpGauss, kDpGaussStar };
enum class Scale { kSmall, kPaper };

inline std::string_view ToString(Setting s) {
  switch (s) {
    case Setting::kS1a: return "S1a";
    case Setting::kS1b: return "S1b";
    case Setting::kS2a: return "S2a";
    case Setting::kS2b: return "S2b";
    case Setting::kS3: return "S3";
    case Setting::kS4: return "S4";
    case Setting::kCustom: return "custom";
  }
  return "unknown";
}

inline Setting ParseSetting(std::string_view s) {
  for (Setting v : {Setting::kS1a, Setting::kS1b, Setting::kS2a, Setting::kS2b, Setting::kS3,
                    Setting::kS4, Setting::kCustom}) {
    if (s == ToString(v)) return v;
  }
  throw ConfigError("unknown setting '" + std::string(s) + "'");
}

inline std::string_view ToString(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kDpOja: return "dp_oja";
    case Method::kDpGauss: return "dp_gauss";
    case Method::kDpGaussStar: return "dp_gauss_star";
  }
  return "unknown";
}

inline Method ParseMethod(std::string_view s) {
  for (Method v : {Method::kOurs, Method::kDpOja, Method::kDpGauss, Method::kDpGaussStar}) {
    if (s == ToString(v)) return v;
  }
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

inline Scale ParseScale(std::string_view s) {
  if (s == "small") return Scale::kSmall;
  if (s == "paper") return Scale::kPaper;
  throw ConfigError("unknown scale '" + std::string(s) + "' (expected small or paper)");
}

// What is measured against the truth: the projector distance in Frobenius,
// spectral or Schatten-q norm, or the covariance error.
struct MetricSpec {
  enum class Kind { kSubspaceFro, kSubspaceSpec, kCovFro, kCovSpec, kSchatten };
  Kind kind = Kind::kSubspaceFro;
  double q = 2.0;  // kSchatten only

  SchattenOrder order() const {
    return std::isinf(q) ? SchattenOrder::Infinity() : SchattenOrder::Of(q);
  }

  bool is_covariance() const { return kind == Kind::kCovFro || kind == Kind::kCovSpec; }

  std::string Name() const {
    switch (kind) {
      case Kind::kSubspaceFro: return "subspace_fro";
      case Kind::kSubspaceSpec: return "subspace_spec";
      case Kind::kCovFro: return "cov_fro";
      case Kind::kCovSpec: return "cov_spec";
      case Kind::kSchatten: return "schatten(" + order().ToString() + ")";
    }
    return "unknown";
  }

  static MetricSpec Parse(std::string_view s) {
    MetricSpec m;
    if (s == "subspace_fro") return m;
    if (s == "subspace_spec") {
      m.kind = Kind::kSubspaceSpec;
      return m;
    }
    if (s == "cov_fro") {
      m.kind = Kind::kCovFro;
      return m;
    }
    if (s == "cov_spec") {
      m.kind = Kind::kCovSpec;
      return m;
    }
    if (s.starts_with("schatten(") && s.ends_with(")")) {
      const std::string_view body = s.substr(9, s.size() - 10);
      double q = 0.0;
      auto res = std::from_chars(body.data(), body.data() + body.size(), q);
      if (res.ec != std::errc() || res.ptr != body.data() + body.size()) {
        throw ConfigError("bad Schatten order in metric '" + std::string(s) + "'");
      }
      m.kind = Kind::kSchatten;
      m.q = q;
      if (!(q > 0.0) || (q < 1.0)) throw ConfigError("Schatten order must be >= 1 in '" + std::string(s) + "'");
      return m;
    }
    throw ConfigError("unknown metric '" + std::string(s) + "'");
  }
};

struct FixedParams {
  long p = 50;
  long r = 1;
  long n = 10000;
  double lambda = 10.0;
  double sigma2 = 1.0;
  double epsilon = 1.0;
  double delta = 0.1;
  SensitivityConstants constants;
  SampleDistribution dist = SampleDistribution::kGaussian;
  double oja_constant = 0.2;
  std::optional<double> oja_stepsize;
  double gauss_scaling_constant = 4.0;
  // Release sigma^2 privately (budget in thirds) instead of treating it as
  // known.
  bool private_sigma2 = false;
};

inline constexpr std::string_view kSweepableParams[] = {"n", "p", "r", "lambda", "sigma2",
                                                        "epsilon", "delta"};

// Applies one swept value. Integer parameters must be given as integers.
inline void ApplyParam(FixedParams& f, std::string_view name, double value) {
  auto as_long = [&](const char* what) {
    if (value != std::floor(value) || value < 1) {
      throw ConfigError(std::string("parameter ") + what + " must be a positive integer");
    }
    return static_cast<long>(value);
  };
  if (name == "n") {
    f.n = as_long("n");
  } else if (name == "p") {
    f.p = as_long("p");
  } else if (name == "r") {
    f.r = as_long("r");
  } else if (name == "lambda") {
    f.lambda = value;
  } else if (name == "sigma2") {
    f.sigma2 = value;
  } else if (name == "epsilon") {
    f.epsilon = value;
  } else if (name == "delta") {
    f.delta = value;
  } else {
    throw ConfigError("parameter '" + std::string(name) + "' cannot be swept");
  }
}

struct ExperimentConfig {
  Setting setting = Setting::kS1a;
  std::string param_name = "n";
  std::vector<double> grid;
  FixedParams fixed;
  int reps = 40;
  std::uint64_t seed = 0;
  std::vector<Method> methods = {Method::kOurs};
  std::vector<MetricSpec> metrics = {MetricSpec{}};
  // Wall-clock timings make the CSV non-reproducible, so they are opt-in;
  // the ms column holds 0 otherwise.
  bool record_timing = false;
  // Data matrix for the custom setting (DPSP binary or CSV).
  std::string data_path;
  // 0 means one worker per hardware thread.
  unsigned threads = 0;
};

// Resource caps for a single replication.
inline constexpr long kMaxDimension = 4096;
inline constexpr double kMaxEntries = 2e8;

inline void Validate(const ExperimentConfig& c) {
  if (c.reps < 1) throw ConfigError("reps must be >= 1");
  if (c.grid.empty()) throw ConfigError("grid must be non-empty");
  if (c.methods.empty()) throw ConfigError("at least one method is required");
  if (c.metrics.empty()) throw ConfigError("at least one metric is required");
  if (std::find(std::begin(kSweepableParams), std::end(kSweepableParams), c.param_name) ==
      std::end(kSweepableParams)) {
    throw ConfigError("parameter '" + c.param_name + "' cannot be swept");
  }
  if (c.setting == Setting::kCustom) {
    if (c.data_path.empty()) throw ConfigError("custom setting needs a data file");
    if (c.param_name != "epsilon" && c.param_name != "delta" && c.param_name != "r") {
      throw ConfigError("custom setting can only sweep epsilon, delta or r");
    }
  }
  for (double g : c.grid) {
    FixedParams f = c.fixed;
    ApplyParam(f, c.param_name, g);
    PrivacyBudget{f.epsilon, f.delta, BudgetSplit::kHalves}.Validate();
    if (c.setting != Setting::kCustom) {
      if (f.p < 2 || f.p > kMaxDimension) {
        throw ConfigError("resource cap exceeded: p must lie in [2, " + std::to_string(kMaxDimension) + "]");
      }
      if (static_cast<double>(f.p) * static_cast<double>(f.n) > kMaxEntries) {
        throw ConfigError("resource cap exceeded: p * n above " + std::to_string(kMaxEntries));
      }
      if (!(f.lambda > 0.0) || !(f.sigma2 > 0.0)) throw ConfigError("lambda and sigma2 must be > 0");
    }
    if (f.r < 1) throw ConfigError("r must be >= 1");
    for (Method m : c.methods) {
      if (m == Method::kDpOja && f.r != 1) {
        throw ConfigError("dp_oja is rank-one only; grid point has r=" + std::to_string(f.r));
      }
      if (m == Method::kOurs && c.setting != Setting::kCustom && 2 * f.r > f.p) {
        throw ConfigError("ours requires 2r <= p");
      }
    }
  }
  for (Method m : c.methods) {
    for (const MetricSpec& metric : c.metrics) {
      if (m == Method::kDpOja && metric.is_covariance()) {
        throw ConfigError("dp_oja produces no covariance estimate; drop metric " + metric.Name());
      }
    }
  }
}

// The simulation settings at two scales. `small` shrinks n-grids and
// replication counts so every setting finishes in about a minute on one core.
inline ExperimentConfig DefaultConfig(Setting setting, Scale scale) {
  const bool paper = scale == Scale::kPaper;
  ExperimentConfig c;
  c.setting = setting;
  c.reps = paper ? 40 : 10;
  c.fixed = FixedParams{};
  const std::vector<Method> gauss_and_ours = {Method::kOurs, Method::kDpGauss, Method::kDpGaussStar};
  const std::vector<Method> all = {Method::kOurs, Method::kDpOja, Method::kDpGauss,
                                   Method::kDpGaussStar};
  switch (setting) {
    case Setting::kS1a:
      c.param_name = "n";
      c.grid = paper ? std::vector<double>{1000, 2000, 5000, 10000, 20000, 50000, 100000}
                     : std::vector<double>{2000, 5000, 10000};
      c.reps = paper ? 40 : 20;
      c.methods = all;
      break;
    case Setting::kS1b:
      c.param_name = "r";
      c.fixed.n = 10000;
      c.grid = paper ? std::vector<double>{1, 2, 3, 4, 5, 6, 8, 10} : std::vector<double>{1, 3, 5};
      c.methods = gauss_and_ours;
      break;
    case Setting::kS2a:
      c.param_name = "epsilon";
      c.fixed.n = paper ? 30000 : 10000;
      c.grid = paper ? std::vector<double>{0.25, 0.5, 1, 2, 4} : std::vector<double>{0.5, 1, 2};
      c.methods = all;
      break;
    case Setting::kS2b:
      c.param_name = "lambda";
      c.fixed.r = 5;
      c.fixed.n = 10000;
      c.grid = paper ? std::vector<double>{2, 5, 10, 20, 50, 100} : std::vector<double>{5, 20, 100};
      c.methods = gauss_and_ours;
      break;
    case Setting::kS3:
      c.param_name = "lambda";
      c.fixed.r = 3;
      c.fixed.n = 30;
      c.grid = paper ? std::vector<double>{20, 50, 100, 150, 200} : std::vector<double>{20, 100, 200};
      c.reps = 40;
      c.methods = gauss_and_ours;
      break;
    case Setting::kS4:
      c.param_name = "n";
      c.fixed.r = 3;
      c.grid = paper ? std::vector<double>{1000, 2000, 5000, 10000, 20000, 50000}
                     : std::vector<double>{1000, 5000, 20000};
      c.methods = gauss_and_ours;
      c.metrics = {MetricSpec{MetricSpec::Kind::kCovFro, 2.0}};
      break;
    case Setting::kCustom:
      c.param_name = "epsilon";
      c.fixed.r = 3;
      c.fixed.epsilon = 2.0;
      c.grid = {2.0};
      c.methods = gauss_and_ours;
      break;
  }
  return c;
}

struct ResultRow {
  std::string setting;
  std::string method;
  std::string param_name;
  double param_value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;  // NaN marks a failed replication
  double ms = 0.0;
  std::string error;   // not serialized; reason for a failed replication
};

// Error rates without constants, for overlays and rate checks.
struct RateParams {
  double lambda = 10.0;
  double sigma2 = 1.0;
  double p = 50;
  double r = 1;
  double n = 10000;
  double epsilon = 1.0;
  double delta = 0.1;
};

// (sigma^2/lambda + sqrt(sigma^2/lambda)) (sqrt(p/n) + p sqrt(r + ln n) sqrt(ln(2.5/delta)) / (n eps)).
inline double SubspaceRate(const RateParams& a) {
  const double ratio = a.sigma2 / a.lambda;
  const double priv = a.p * std::sqrt(a.r + std::log(a.n)) / (a.n * a.epsilon) *
                      std::sqrt(std::log(2.5 / a.delta));
  return (ratio + std::sqrt(ratio)) * (std::sqrt(a.p / a.n) + priv);
}

// lambda (sqrt(r/n) + sqrt(r)(r + ln n) sqrt(ln(2.5/delta)) / (n eps))
//   + sqrt(sigma^2 (lambda + sigma^2)) (sqrt(p/n) + p sqrt(r + ln n) sqrt(ln(2.5/delta)) / (n eps)).
inline double CovarianceRate(const RateParams& a) {
  const double logd = std::sqrt(std::log(2.5 / a.delta));
  const double logn = std::log(a.n);
  const double eig = a.lambda * (std::sqrt(a.r / a.n) +
                                 std::sqrt(a.r) * (a.r + logn) / (a.n * a.epsilon) * logd);
  const double vec = std::sqrt(a.sigma2 * (a.lambda + a.sigma2)) *
                     (std::sqrt(a.p / a.n) + a.p * std::sqrt(a.r + logn) / (a.n * a.epsilon) * logd);
  return eig + vec;
}

namespace harness_internal {

struct Truth {
  OrthonormalFactor u;
  SymmetricMatrix sigma;
};

struct MethodOutput {
  OrthonormalFactor u;
  std::optional<SymmetricMatrix> sigma;
};

inline double Evaluate(const MetricSpec& metric, const MethodOutput& out, const Truth& truth) {
  switch (metric.kind) {
    case MetricSpec::Kind::kSubspaceFro:
      return ProjectionDistance(out.u, truth.u, SchattenOrder::Frobenius());
    case MetricSpec::Kind::kSubspaceSpec:
      return ProjectionDistance(out.u, truth.u, SchattenOrder::Infinity());
    case MetricSpec::Kind::kSchatten:
      return ProjectionDistance(out.u, truth.u, metric.order());
    case MetricSpec::Kind::kCovFro:
    case MetricSpec::Kind::kCovSpec:
      if (!out.sigma) throw ConfigError("method produced no covariance estimate");
      return SchattenNorm(*out.sigma - truth.sigma, metric.kind == MetricSpec::Kind::kCovFro
                                                        ? SchattenOrder::Frobenius()
                                                        : SchattenOrder::Infinity());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Completes a rank-r baseline covariance with the noise level on the
// orthogonal complement: Sigma_r + sigma^2 (I - U~ U~^T).
inline SymmetricMatrix CompleteCovariance(const SymmetricMatrix& sigma_r, const OrthonormalFactor& u,
                                          double sigma2) {
  const Matrix& v = u.matrix();
  Matrix s = sigma_r.matrix() - sigma2 * (v * v.transpose());
  s.diagonal().array() += sigma2;
  return SymmetricMatrix(s);
}

struct Problem {
  const DataMatrix* data;
  Truth truth;
  FixedParams params;  // lambda / sigma2 used for calibration
};

inline MethodOutput RunMethod(Method m, const Problem& prob, std::uint64_t seed) {
  const FixedParams& f = prob.params;
  Rng rng(seed);
  BaselineConfig bc;
  bc.budget = {f.epsilon, f.delta, BudgetSplit::kHalves};
  bc.oja_constant = f.oja_constant;
  bc.oja_stepsize = f.oja_stepsize;
  bc.gauss_scaling_constant = f.gauss_scaling_constant;
  switch (m) {
    case Method::kOurs: {
      EstimateRequest req;
      req.r = f.r;
      req.lambda = f.lambda;
      req.budget = {f.epsilon, f.delta, BudgetSplit::kHalves};
      req.constants = f.constants;
      req.seed = seed;
      if (f.private_sigma2) {
        req.sigma2 = PrivateSigma2{f.sigma2};
      } else {
        req.sigma2 = KnownSigma2{f.sigma2};
      }
      DpEstimate est = EstimateDp(*prob.data, req);
      return {std::move(est.u_tilde), std::move(est.sigma_tilde)};
    }
    case Method::kDpOja: {
      bc.method = BaselineMethod::kDpOja;
      BaselineResult res = DpOja(*prob.data, f.lambda, f.sigma2, bc, rng);
      return {std::move(res.u_tilde), std::nullopt};
    }
    case Method::kDpGauss: {
      bc.method = BaselineMethod::kDpGauss;
      BaselineResult res = DpGauss(*prob.data, f.r, f.sigma2, f.lambda, bc, rng);
      SymmetricMatrix full = CompleteCovariance(*res.sigma_r, res.u_tilde, f.sigma2);
      return {std::move(res.u_tilde), std::move(full)};
    }
    case Method::kDpGaussStar: {
      bc.method = BaselineMethod::kDpGaussStar;
      BaselineResult res = DpGaussStar(*prob.data, f.r, bc, rng);
      SymmetricMatrix full = CompleteCovariance(*res.sigma_r, res.u_tilde, f.sigma2);
      return {std::move(res.u_tilde), std::move(full)};
    }
  }
  throw ConfigError("unknown method");
}

// Non-private plug-ins and reference for a user-supplied data matrix: the
// bulk estimator for sigma^2, the mean of the top-r sample eigenvalues minus
// sigma^2 for lambda, and the top-r sample eigenspace as the reference.
struct CustomReference {
  double sigma2 = 1.0;
  double lambda = 1.0;
  Truth truth;
};

inline CustomReference BuildCustomReference(const DataMatrix& x, long r) {
  if (2 * r > x.p()) throw ConfigError("custom: need 2r <= p");
  const SpectralDecomposition eig = EigSym(x.SampleCov());
  CustomReference ref;
  const long m = std::min(x.p(), x.n());
  if (m >= 8) {
    ref.sigma2 = Sigma2Hat(eig.eigenvalues, x.p(), x.n());
  } else {
    ref.sigma2 = eig.eigenvalues.tail(x.p() - r).mean();
  }
  if (!(ref.sigma2 > 0.0)) ref.sigma2 = std::numeric_limits<double>::min();
  ref.lambda = std::max(eig.eigenvalues.head(r).mean() - ref.sigma2, 1e-12);
  OrthonormalFactor u = TopR(eig, r);
  const Matrix& v = u.matrix();
  Matrix s = v * (eig.eigenvalues.head(r).array() - ref.sigma2).matrix().asDiagonal() * v.transpose();
  s.diagonal().array() += ref.sigma2;
  ref.truth = {std::move(u), SymmetricMatrix(s)};
  return ref;
}

template <typename Fn>
void ParallelFor(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mu;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace harness_internal

// Stream seed for method `m` at grid point g, replication j. The data of a
// replication comes from a method-independent stream so all methods see the
// same sample.
inline std::uint64_t MethodSeed(const ExperimentConfig& c, Method m, std::size_t g, int j) {
  return DeriveSeed(c.seed, ToString(c.setting), ToString(m), static_cast<std::uint64_t>(g),
                    static_cast<std::uint64_t>(j));
}

inline std::uint64_t DataSeed(const ExperimentConfig& c, std::size_t g, int j) {
  return DeriveSeed(c.seed, ToString(c.setting), "data", static_cast<std::uint64_t>(g),
                    static_cast<std::uint64_t>(j));
}

// Runs every (method, grid point, replication, metric) combination. Rows come
// back sorted by method (config order), grid point, replication and metric.
// A replication that throws is recorded with value NaN and excluded from
// summaries.
inline std::vector<ResultRow> RunExperiment(const ExperimentConfig& config) {
  Validate(config);
  const std::size_t grid_size = config.grid.size();
  const auto reps = static_cast<std::size_t>(config.reps);
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_metrics = config.metrics.size();

  std::optional<DataMatrix> custom_data;
  if (config.setting == Setting::kCustom) custom_data = LoadDataMatrix(config.data_path);

  std::vector<ResultRow> rows(n_methods * grid_size * reps * n_metrics);
  auto slot = [&](std::size_t mi, std::size_t g, std::size_t j, std::size_t k) {
    return ((mi * grid_size + g) * reps + j) * n_metrics + k;
  };

  harness_internal::ParallelFor(grid_size * reps, config.threads, [&](std::size_t unit) {
    const std::size_t g = unit / reps;
    const std::size_t j = unit % reps;
    FixedParams f = config.fixed;
    ApplyParam(f, config.param_name, config.grid[g]);

    std::optional<DataMatrix> sampled;
    harness_internal::Problem prob{nullptr, {}, f};
    std::string setup_error;
    try {
      if (custom_data) {
        const auto ref = harness_internal::BuildCustomReference(*custom_data, f.r);
        prob.data = &*custom_data;
        prob.truth = ref.truth;
        prob.params.sigma2 = ref.sigma2;
        prob.params.lambda = ref.lambda;
        prob.params.p = custom_data->p();
        prob.params.n = custom_data->n();
      } else {
        Rng data_rng(DataSeed(config, g, static_cast<int>(j)));
        SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(f.p, f.r, data_rng), f.lambda, f.sigma2);
        sampled = Sample(model, f.n, f.dist, data_rng);
        prob.data = &*sampled;
        prob.truth = {model.u(), CovarianceOf(model)};
      }
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      const Method m = config.methods[mi];
      const std::uint64_t seed = MethodSeed(config, m, g, static_cast<int>(j));
      std::vector<double> values(n_metrics, std::numeric_limits<double>::quiet_NaN());
      std::string error = setup_error;
      double ms = 0.0;
      if (error.empty()) {
        try {
          const auto t0 = std::chrono::steady_clock::now();
          const harness_internal::MethodOutput out = harness_internal::RunMethod(m, prob, seed);
          const auto t1 = std::chrono::steady_clock::now();
          if (config.record_timing) {
            ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
          }
          for (std::size_t k = 0; k < n_metrics; ++k) {
            values[k] = harness_internal::Evaluate(config.metrics[k], out, prob.truth);
          }
        } catch (const std::exception& e) {
          error = e.what();
          std::fill(values.begin(), values.end(), std::numeric_limits<double>::quiet_NaN());
        }
      }
      for (std::size_t k = 0; k < n_metrics; ++k) {
        ResultRow& row = rows[slot(mi, g, j, k)];
        row.setting = std::string(ToString(config.setting));
        row.method = std::string(ToString(m));
        row.param_name = config.param_name;
        row.param_value = config.grid[g];
        row.rep = static_cast<int>(j);
        row.seed = seed;
        row.metric = config.metrics[k].Name();
        row.value = values[k];
        row.ms = ms;
        row.error = error;
      }
    }
  });
  return rows;
}

inline constexpr std::string_view kResultCsvHeader =
    "setting,method,param_name,param_value,rep,seed,metric,value,ms";

namespace harness_internal {

inline std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double ParseNum(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("CSV: bad number '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

}  // namespace harness_internal

inline void WriteResultsCsv(std::ostream& os, const std::vector<ResultRow>& rows) {
  using harness_internal::Num;
  os << kResultCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    os << r.setting << ',' << r.method << ',' << r.param_name << ',' << Num(r.param_value) << ','
       << r.rep << ',' << r.seed << ',' << r.metric << ',' << Num(r.value) << ',' << Num(r.ms)
       << '\n';
  }
  if (!os) throw IoError("failed writing results CSV");
}

inline std::vector<ResultRow> ReadResultsCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultCsvHeader) throw IoError("results CSV: unexpected header '" + line + "'");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = harness_internal::SplitCsv(line);
    if (f.size() != 9) throw IoError("results CSV: expected 9 fields in '" + line + "'");
    ResultRow r;
    r.setting = std::string(f[0]);
    r.method = std::string(f[1]);
    r.param_name = std::string(f[2]);
    r.param_value = harness_internal::ParseNum(f[3]);
    r.rep = static_cast<int>(harness_internal::ParseNum(f[4]));
    {
      std::uint64_t s = 0;
      auto res = std::from_chars(f[5].data(), f[5].data() + f[5].size(), s);
      if (res.ec != std::errc()) throw IoError("results CSV: bad seed");
      r.seed = s;
    }
    r.metric = std::string(f[6]);
    r.value = harness_internal::ParseNum(f[7]);
    r.ms = harness_internal::ParseNum(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct SummaryRow {
  std::string setting;
  std::string method;
  std::string param_name;
  double param_value = 0.0;
  std::string metric;
  int count = 0;   // finite values
  int failed = 0;  // non-finite values (failed replications)
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation across replications
  double se = 0.0;  // sd / sqrt(count)
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "setting,method,param_name,param_value,metric,count,failed,mean,sd,se,q1,median,q3";

// One row per (setting, method, parameter value, metric), ordered by that key.
// Values are sorted before reduction, so the result does not depend on the
// order of the input rows. Quartiles use linear interpolation (type 7).
inline std::vector<SummaryRow> Summarize(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw DomainError("Summarize: no rows");
  using Key = std::tuple<std::string, std::string, std::string, double, std::string>;
  std::map<Key, std::pair<std::vector<double>, int>> groups;
  for (const ResultRow& r : rows) {
    auto& [vals, failed] = groups[Key{r.setting, r.method, r.param_name, r.param_value, r.metric}];
    if (std::isfinite(r.value)) {
      vals.push_back(r.value);
    } else {
      ++failed;
    }
  }
  std::vector<SummaryRow> out;
  for (auto& [key, group] : groups) {
    auto& [vals, failed] = group;
    SummaryRow s;
    std::tie(s.setting, s.method, s.param_name, s.param_value, s.metric) = key;
    s.failed = failed;
    s.count = static_cast<int>(vals.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (vals.empty()) {
      s.mean = s.sd = s.se = s.q1 = s.median = s.q3 = nan;
    } else {
      std::sort(vals.begin(), vals.end());
      s.mean = Mean(vals);
      s.sd = SampleSd(vals);
      s.se = s.sd / std::sqrt(static_cast<double>(vals.size()));
      s.q1 = QuantileType7(vals, 0.25);
      s.median = QuantileType7(vals, 0.5);
      s.q3 = QuantileType7(vals, 0.75);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void WriteSummaryCsv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  using harness_internal::Num;
  os << kSummaryCsvHeader << '\n';
  for (const SummaryRow& s : rows) {
    os << s.setting << ',' << s.method << ',' << s.param_name << ',' << Num(s.param_value) << ','
       << s.metric << ',' << s.count << ',' << s.failed << ',' << Num(s.mean) << ',' << Num(s.sd)
       << ',' << Num(s.se) << ',' << Num(s.q1) << ',' << Num(s.median) << ',' << Num(s.q3) << '\n';
  }
  if (!os) throw IoError("failed writing summary CSV");
}

}  // namespace dpspectra

#endif  // DPSPECTRA_HARNESS_HPP_
