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

// JSON documents for estimates, baseline results and experiment configs.

#ifndef DPSPECTRA_REPORT_JSON_HPP_
#define DPSPECTRA_REPORT_JSON_HPP_

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpspectra/baselines.hpp"
#include "dpspectra/errors.hpp"
#include "dpspectra/harness.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/mechanisms.hpp"
#include "dpspectra/sensitivity.hpp"

namespace dpspectra {

using Json = nlohmann::json;

// Matrices are {"rows", "cols", "data"} with data in row-major order.
inline Json MatrixToJson(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix MatrixFromJson(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw IoError("matrix JSON: data length does not match rows * cols");
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  }
  return m;
}

inline Json ToJson(const SensitivityBundle& b) {
  return Json{{"delta1", b.delta1},
              {"delta2", b.delta2},
              {"delta3", b.delta3},
              {"constants",
               {{"c_proj", b.constants.c_proj},
                {"c_eig", b.constants.c_eig},
                {"c_sigma", b.constants.c_sigma}}},
              {"regime", std::string(ToString(b.regime))}};
}

inline SensitivityBundle SensitivityBundleFromJson(const Json& j) {
  SensitivityBundle b;
  b.delta1 = j.at("delta1").get<double>();
  b.delta2 = j.at("delta2").get<double>();
  b.delta3 = j.at("delta3").get<double>();
  const Json& c = j.at("constants");
  b.constants.c_proj = c.at("c_proj").get<double>();
  b.constants.c_eig = c.at("c_eig").get<double>();
  b.constants.c_sigma = c.at("c_sigma").get<double>();
  const auto regime = j.at("regime").get<std::string>();
  if (regime == ToString(KappaRegime::kBounded)) {
    b.regime = KappaRegime::kBounded;
  } else if (regime == ToString(KappaRegime::kDiverging)) {
    b.regime = KappaRegime::kDiverging;
  } else {
    throw IoError("unknown regime '" + regime + "'");
  }
  return b;
}

inline Json ToJson(const PrivacyBudget& b) {
  return Json{{"epsilon", b.epsilon}, {"delta", b.delta}, {"split", std::string(ToString(b.split))}};
}

inline PrivacyBudget PrivacyBudgetFromJson(const Json& j) {
  PrivacyBudget b;
  b.epsilon = j.at("epsilon").get<double>();
  b.delta = j.at("delta").get<double>();
  const auto split = j.at("split").get<std::string>();
  if (split == "halves") {
    b.split = BudgetSplit::kHalves;
  } else if (split == "thirds") {
    b.split = BudgetSplit::kThirds;
  } else {
    throw IoError("unknown split '" + split + "'");
  }
  return b;
}

inline Json ToJson(const DpEstimate& e) {
  Json stages = Json::array();
  for (const StageBudget& s : e.stages) {
    stages.push_back({{"name", s.name}, {"epsilon", s.epsilon}, {"delta", s.delta}});
  }
  return Json{{"kind", "dp_estimate"},
              {"p", e.p},
              {"n", e.n},
              {"r", e.r},
              {"lambda", e.lambda},
              {"seed", e.seed},
              {"budget", ToJson(e.budget)},
              {"stages", std::move(stages)},
              {"sensitivities", ToJson(e.sensitivities)},
              {"sigma2_used", e.sigma2_used},
              {"sigma2_private", e.sigma2_private},
              {"noise_sd_projector", e.noise_sd_projector},
              {"noise_sd_eigs", e.noise_sd_eigs},
              {"noise_sd_sigma2", e.noise_sd_sigma2},
              {"warnings", e.warnings},
              {"u_tilde", MatrixToJson(e.u_tilde.matrix())},
              {"lambda_tilde", MatrixToJson(e.lambda_tilde.matrix())},
              {"sigma_tilde", MatrixToJson(e.sigma_tilde.matrix())}};
}

inline DpEstimate DpEstimateFromJson(const Json& j) {
  if (j.value("kind", "") != "dp_estimate") throw IoError("JSON document is not a dp_estimate");
  DpEstimate e;
  e.p = j.at("p").get<long>();
  e.n = j.at("n").get<long>();
  e.r = j.at("r").get<long>();
  e.lambda = j.at("lambda").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.budget = PrivacyBudgetFromJson(j.at("budget"));
  for (const Json& s : j.at("stages")) {
    e.stages.push_back({s.at("name").get<std::string>(), s.at("epsilon").get<double>(),
                        s.at("delta").get<double>()});
  }
  e.sensitivities = SensitivityBundleFromJson(j.at("sensitivities"));
  e.sigma2_used = j.at("sigma2_used").get<double>();
  e.sigma2_private = j.at("sigma2_private").get<bool>();
  e.noise_sd_projector = j.at("noise_sd_projector").get<double>();
  e.noise_sd_eigs = j.at("noise_sd_eigs").get<double>();
  e.noise_sd_sigma2 = j.at("noise_sd_sigma2").get<double>();
  e.warnings = j.at("warnings").get<std::vector<std::string>>();
  e.u_tilde = OrthonormalFactor(MatrixFromJson(j.at("u_tilde")));
  e.lambda_tilde = SymmetricMatrix(MatrixFromJson(j.at("lambda_tilde")));
  e.sigma_tilde = SymmetricMatrix(MatrixFromJson(j.at("sigma_tilde")));
  return e;
}

inline Json ToJson(const BaselineResult& b, const BaselineConfig& config, std::uint64_t seed) {
  Json j{{"kind", "baseline"},
         {"method", std::string(ToString(b.method))},
         {"seed", seed},
         {"budget", ToJson(config.budget)},
         {"oja_constant", config.oja_constant},
         {"gauss_scaling_constant", config.gauss_scaling_constant},
         {"scale", b.scale},
         {"noise_sd", b.noise_sd},
         {"violations", b.violations},
         {"heuristic_privacy", b.heuristic_privacy},
         {"u_tilde", MatrixToJson(b.u_tilde.matrix())}};
  if (config.oja_stepsize) j["oja_stepsize"] = *config.oja_stepsize;
  if (b.sigma_r) j["sigma_r"] = MatrixToJson(b.sigma_r->matrix());
  return j;
}

// Experiment configs. Every key is optional and overrides the defaults of
// the named setting at the named scale.
inline ExperimentConfig ConfigFromJson(const Json& j) {
  const Setting setting = ParseSetting(j.value("setting", std::string("S1a")));
  const Scale scale = ParseScale(j.value("scale", std::string("small")));
  ExperimentConfig c = DefaultConfig(setting, scale);
  try {
    if (j.contains("param_name")) c.param_name = j.at("param_name").get<std::string>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
    if (j.contains("reps")) c.reps = j.at("reps").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("data")) c.data_path = j.at("data").get<std::string>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(ParseMethod(m.get<std::string>()));
    }
    if (j.contains("metrics")) {
      c.metrics.clear();
      for (const auto& m : j.at("metrics")) c.metrics.push_back(MetricSpec::Parse(m.get<std::string>()));
    }
    if (j.contains("fixed")) {
      const Json& f = j.at("fixed");
      FixedParams& x = c.fixed;
      x.p = f.value("p", x.p);
      x.r = f.value("r", x.r);
      x.n = f.value("n", x.n);
      x.lambda = f.value("lambda", x.lambda);
      x.sigma2 = f.value("sigma2", x.sigma2);
      x.epsilon = f.value("epsilon", x.epsilon);
      x.delta = f.value("delta", x.delta);
      x.constants.c_proj = f.value("c_proj", x.constants.c_proj);
      x.constants.c_eig = f.value("c_eig", x.constants.c_eig);
      x.constants.c_sigma = f.value("c_sigma", x.constants.c_sigma);
      if (f.contains("dist")) x.dist = ParseSampleDistribution(f.at("dist").get<std::string>());
      x.oja_constant = f.value("oja_constant", x.oja_constant);
      if (f.contains("oja_stepsize")) x.oja_stepsize = f.at("oja_stepsize").get<double>();
      x.gauss_scaling_constant = f.value("gauss_scaling_constant", x.gauss_scaling_constant);
      x.private_sigma2 = f.value("private_sigma2", x.private_sigma2);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  return c;
}

inline Json ToJson(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(ToString(m));
  std::vector<std::string> metrics;
  for (const MetricSpec& m : c.metrics) metrics.push_back(m.Name());
  const FixedParams& f = c.fixed;
  Json fixed{{"p", f.p},
             {"r", f.r},
             {"n", f.n},
             {"lambda", f.lambda},
             {"sigma2", f.sigma2},
             {"epsilon", f.epsilon},
             {"delta", f.delta},
             {"c_proj", f.constants.c_proj},
             {"c_eig", f.constants.c_eig},
             {"c_sigma", f.constants.c_sigma},
             {"dist", std::string(ToString(f.dist))},
             {"oja_constant", f.oja_constant},
             {"gauss_scaling_constant", f.gauss_scaling_constant},
             {"private_sigma2", f.private_sigma2}};
  if (f.oja_stepsize) fixed["oja_stepsize"] = *f.oja_stepsize;
  Json j{{"setting", std::string(ToString(c.setting))},
         {"param_name", c.param_name},
         {"grid", c.grid},
         {"reps", c.reps},
         {"seed", c.seed},
         {"methods", methods},
         {"metrics", metrics},
         {"record_timing", c.record_timing},
         {"fixed", std::move(fixed)}};
  if (!c.data_path.empty()) j["data"] = c.data_path;
  return j;
}

inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

}  // namespace dpspectra

#endif  // DPSPECTRA_REPORT_JSON_HPP_
