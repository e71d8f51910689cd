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

// dpspectra command-line tool.
//
//   dpspectra run --setting S1a --scale small --seed 7 --out results.csv
//   dpspectra summarize results.csv --out summary.csv
//   dpspectra estimate --data X.bin --r 3 --eps 1 --delta 0.1 --lambda 10 \
//       --sigma2 private --out estimate.json
//   dpspectra probe-sensitivity --p 50 --r 1 --n 10000 --lambda 10
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpspectra/dpspectra.hpp"
#include "dpspectra/report_json.hpp"

namespace {

using namespace dpspectra;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunOptions {
  std::string config_path;
  std::optional<std::string> setting;
  std::optional<std::string> scale;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<unsigned> threads;
  std::optional<std::string> data;
  std::vector<std::string> methods;
  std::vector<std::string> metrics;
  bool timing = false;
  bool print_config = false;
  std::string out = "-";
};

struct SummarizeOptions {
  std::string input;
  std::string out = "-";
};

struct EstimateOptions {
  std::string data;
  long r = 1;
  double eps = 1.0;
  double delta = 0.1;
  double lambda = 0.0;
  std::string sigma2 = "1";
  double sigma2_calibration = 1.0;
  std::uint64_t seed = 0;
  double c_proj = 4.0;
  double c_eig = 4.0;
  double c_sigma = 4.0;
  std::optional<double> kappa0;
  bool psd = false;
  std::string out = "-";
};

struct ProbeOptions {
  long p = 50;
  long r = 1;
  long n = 10000;
  double lambda = 10.0;
  double sigma2 = 1.0;
  int trials = 200;
  std::uint64_t seed = 0;
  std::string dist = "gaussian";
  double c = 4.0;
  std::string out = "-";
};

// Writes to `path`, or to stdout for "-".
template <typename Fn>
void WriteOutput(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  fn(os);
  if (!os) throw IoError("failed writing '" + path + "'");
}

ExperimentConfig BuildConfig(const RunOptions& o) {
  Json j = Json::object();
  if (!o.config_path.empty()) j = ReadJsonFile(o.config_path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  if (o.setting) j["setting"] = *o.setting;
  if (o.scale) j["scale"] = *o.scale;
  ExperimentConfig c = ConfigFromJson(j);
  if (o.seed) c.seed = *o.seed;
  if (o.reps) c.reps = *o.reps;
  if (o.threads) c.threads = *o.threads;
  if (o.data) c.data_path = *o.data;
  if (o.timing) c.record_timing = true;
  if (!o.methods.empty()) {
    c.methods.clear();
    for (const auto& m : o.methods) c.methods.push_back(ParseMethod(m));
  }
  if (!o.metrics.empty()) {
    c.metrics.clear();
    for (const auto& m : o.metrics) c.metrics.push_back(MetricSpec::Parse(m));
  }
  Validate(c);
  return c;
}

int Run(const RunOptions& o) {
  const ExperimentConfig c = BuildConfig(o);
  if (o.print_config) {
    std::cout << ToJson(c).dump(2) << '\n';
    return 0;
  }
  const auto rows = RunExperiment(c);
  int failed = 0;
  for (const ResultRow& r : rows) {
    if (!std::isfinite(r.value)) ++failed;
  }
  if (failed > 0) {
    std::cerr << "warning: " << failed << " of " << rows.size() << " rows failed";
    for (const ResultRow& r : rows) {
      if (!r.error.empty()) {
        std::cerr << " (first error: " << r.error << ")";
        break;
      }
    }
    std::cerr << '\n';
  }
  WriteOutput(o.out, [&](std::ostream& os) { WriteResultsCsv(os, rows); });
  return 0;
}

int Summarize(const SummarizeOptions& o) {
  std::ifstream in(o.input);
  if (!in) throw IoError("cannot open '" + o.input + "'");
  const auto summary = dpspectra::Summarize(ReadResultsCsv(in));
  WriteOutput(o.out, [&](std::ostream& os) { WriteSummaryCsv(os, summary); });
  return 0;
}

int Estimate(const EstimateOptions& o) {
  if (!(o.lambda > 0.0)) throw ConfigError("--lambda (the public spike strength) must be > 0");
  const DataMatrix x = LoadDataMatrix(o.data);
  EstimateRequest req;
  req.r = o.r;
  req.lambda = o.lambda;
  req.budget = {o.eps, o.delta, BudgetSplit::kHalves};
  req.constants = {o.c_proj, o.c_eig, o.c_sigma};
  req.seed = o.seed;
  if (o.kappa0) {
    req.regime = KappaRegime::kDiverging;
    req.kappa0 = *o.kappa0;
  }
  if (o.sigma2 == "private") {
    req.sigma2 = PrivateSigma2{o.sigma2_calibration};
  } else {
    double v = 0.0;
    std::istringstream is(o.sigma2);
    if (!(is >> v) || !is.eof()) throw ConfigError("--sigma2 must be a number or 'private'");
    req.sigma2 = KnownSigma2{v};
  }
  DpEstimate est = EstimateDp(x, req);
  for (const std::string& w : est.warnings) std::cerr << "warning: " << w << '\n';
  Json j = ToJson(est);
  if (o.psd) j["sigma_tilde_psd"] = MatrixToJson(PsdProject(est.sigma_tilde).matrix());
  WriteOutput(o.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

int Probe(const ProbeOptions& o) {
  const SampleDistribution dist = ParseSampleDistribution(o.dist);
  Rng rng(o.seed);
  const SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(o.p, o.r, rng), o.lambda, o.sigma2);
  const double d1 = Delta1(o.lambda, o.sigma2, o.p, o.r, o.n, o.c);
  const double d2 = Delta2(o.lambda, o.sigma2, o.p, o.r, o.n, o.c);
  const ProbeStats proj = EmpiricalProjectorSensitivity(model, o.n, o.r, o.trials, rng, dist);
  const EigenvalueProbeStats eig = EmpiricalEigenvalueSensitivity(model, o.n, o.trials, rng, dist);
  auto stats = [](const ProbeStats& s, double bound) {
    return Json{{"bound", bound},     {"max", s.max},
                {"mean", s.mean},     {"p99", s.p99},
                {"fraction_within", s.FractionWithin(bound)}};
  };
  Json j{{"kind", "sensitivity_probe"},
         {"p", o.p},
         {"r", o.r},
         {"n", o.n},
         {"lambda", o.lambda},
         {"sigma2", o.sigma2},
         {"trials", o.trials},
         {"seed", o.seed},
         {"dist", std::string(ToString(dist))},
         {"c", o.c},
         {"projector", stats(proj, d1)},
         {"eigenvalues", stats(eig, d2)}};
  j["eigenvalues"]["hoffman_wielandt_violations"] = eig.hoffman_wielandt_violations;
  WriteOutput(o.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private spiked covariance estimation"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a simulation setting and write the results CSV");
  run_cmd->add_option("--config", run.config_path, "JSON experiment config");
  run_cmd->add_option("--setting", run.setting, "S1a, S1b, S2a, S2b, S3, S4 or custom");
  run_cmd->add_option("--scale", run.scale, "small or paper");
  run_cmd->add_option("--seed", run.seed, "Base seed");
  run_cmd->add_option("--reps", run.reps, "Replications per grid point");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--data", run.data, "Data matrix for the custom setting");
  run_cmd->add_option("--methods", run.methods, "ours, dp_oja, dp_gauss, dp_gauss_star");
  run_cmd->add_option("--metrics", run.metrics, "subspace_fro, subspace_spec, cov_fro, cov_spec, schatten(q)");
  run_cmd->add_flag("--timing", run.timing, "Record wall-clock time per method call");
  run_cmd->add_flag("--print-config", run.print_config, "Print the resolved config and exit");
  run_cmd->add_option("--out", run.out, "Output CSV ('-' for stdout)");

  SummarizeOptions sum;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize a results CSV");
  sum_cmd->add_option("input", sum.input, "Results CSV")->required();
  sum_cmd->add_option("--out", sum.out, "Output CSV ('-' for stdout)");

  EstimateOptions est;
  auto* est_cmd = app.add_subcommand("estimate", "Private estimate from a data matrix");
  est_cmd->add_option("--data", est.data, "Data matrix (binary or CSV, p rows)")->required();
  est_cmd->add_option("--r", est.r, "Rank")->required();
  est_cmd->add_option("--eps", est.eps, "Privacy epsilon");
  est_cmd->add_option("--delta", est.delta, "Privacy delta");
  est_cmd->add_option("--lambda", est.lambda, "Public smallest spike strength")->required();
  est_cmd->add_option("--sigma2", est.sigma2, "Known noise level, or 'private'");
  est_cmd->add_option("--sigma2-calibration", est.sigma2_calibration,
                      "Public sigma^2 guess used for Delta3 in private mode");
  est_cmd->add_option("--seed", est.seed, "Seed");
  est_cmd->add_option("--c-proj", est.c_proj, "Constant in Delta1");
  est_cmd->add_option("--c-eig", est.c_eig, "Constant in Delta2");
  est_cmd->add_option("--c-sigma", est.c_sigma, "Constant in Delta3");
  est_cmd->add_option("--kappa0", est.kappa0, "Condition number bound (diverging regime)");
  est_cmd->add_flag("--psd", est.psd, "Also emit the PSD projection of the covariance");
  est_cmd->add_option("--out", est.out, "Output JSON ('-' for stdout)");

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe-sensitivity", "Empirical neighbor sensitivities");
  probe_cmd->add_option("--p", probe.p, "Dimension");
  probe_cmd->add_option("--r", probe.r, "Rank");
  probe_cmd->add_option("--n", probe.n, "Sample size");
  probe_cmd->add_option("--lambda", probe.lambda, "Spike strength");
  probe_cmd->add_option("--sigma2", probe.sigma2, "Noise level");
  probe_cmd->add_option("--trials", probe.trials, "Neighbor pairs");
  probe_cmd->add_option("--seed", probe.seed, "Seed");
  probe_cmd->add_option("--dist", probe.dist, "gaussian, rademacher or uniform");
  probe_cmd->add_option("--c", probe.c, "Constant in Delta1 and Delta2");
  probe_cmd->add_option("--out", probe.out, "Output JSON ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return Run(run);
    if (*sum_cmd) return Summarize(sum);
    if (*est_cmd) return Estimate(est);
    if (*probe_cmd) return Probe(probe);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
