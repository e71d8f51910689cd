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

#include "dpspectra/report_json.hpp"

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "dpspectra/errors.hpp"
#include "dpspectra/harness.hpp"
#include "dpspectra/mechanisms.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/spiked_model.hpp"

namespace dpspectra {
namespace {

DpEstimate SomeEstimate() {
  Rng rng(1);
  const SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(10, 2, rng), 10.0, 1.0);
  const DataMatrix x = Sample(model, 500, SampleDistribution::kGaussian, rng);
  EstimateRequest req;
  req.r = 2;
  req.lambda = 10.0;
  req.sigma2 = KnownSigma2{1.0};
  req.budget = {1.0, 0.1, BudgetSplit::kHalves};
  req.seed = 99;
  return EstimateDp(x, req);
}

TEST(MatrixJsonTest, RowMajorLayout) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Json j = MatrixToJson(m);
  EXPECT_EQ(j.at("rows"), 2);
  EXPECT_EQ(j.at("cols"), 3);
  EXPECT_EQ(j.at("data"), Json({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
  EXPECT_EQ(MatrixFromJson(j), m);
}

TEST(MatrixJsonTest, RejectsSizeMismatch) {
  const Json j{{"rows", 2}, {"cols", 2}, {"data", {1.0, 2.0, 3.0}}};
  EXPECT_THROW(MatrixFromJson(j), IoError);
}

TEST(DpEstimateJsonTest, RoundTripThroughText) {
  const DpEstimate e = SomeEstimate();
  const Json j = ToJson(e);
  EXPECT_EQ(j.at("kind"), "dp_estimate");
  const DpEstimate back = DpEstimateFromJson(Json::parse(j.dump()));
  EXPECT_EQ(back.u_tilde.matrix(), e.u_tilde.matrix());
  EXPECT_EQ(back.lambda_tilde.matrix(), e.lambda_tilde.matrix());
  EXPECT_EQ(back.sigma_tilde.matrix(), e.sigma_tilde.matrix());
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.stages.size(), e.stages.size());
  EXPECT_EQ(back.sensitivities.delta1, e.sensitivities.delta1);
  EXPECT_EQ(back.noise_sd_projector, e.noise_sd_projector);
  EXPECT_EQ(back.budget.epsilon, 1.0);
  EXPECT_EQ(ToJson(back).dump(), j.dump());
}

TEST(DpEstimateJsonTest, RejectsOtherDocuments) {
  EXPECT_THROW(DpEstimateFromJson(Json{{"kind", "baseline"}}), IoError);
  Json j = ToJson(SomeEstimate());
  j["budget"]["split"] = "quarters";
  EXPECT_THROW(DpEstimateFromJson(j), IoError);
  j = ToJson(SomeEstimate());
  j["sensitivities"]["regime"] = "unknown";
  EXPECT_THROW(DpEstimateFromJson(j), IoError);
  j = ToJson(SomeEstimate());
  j.erase("u_tilde");
  EXPECT_ANY_THROW(DpEstimateFromJson(j));
}

TEST(ConfigJsonTest, RoundTrip) {
  ExperimentConfig c = DefaultConfig(Setting::kS2b, Scale::kPaper);
  c.seed = 123;
  c.metrics = {MetricSpec{}, MetricSpec::Parse("schatten(3)")};
  c.fixed.oja_stepsize = 0.01;
  c.fixed.private_sigma2 = true;
  c.fixed.dist = SampleDistribution::kRademacher;
  const ExperimentConfig back = ConfigFromJson(Json::parse(ToJson(c).dump()));
  EXPECT_EQ(ToJson(back), ToJson(c));
  EXPECT_EQ(back.setting, Setting::kS2b);
  EXPECT_EQ(back.grid, c.grid);
  EXPECT_EQ(*back.fixed.oja_stepsize, 0.01);
}

TEST(ConfigJsonTest, KeysOverrideSettingDefaults) {
  const ExperimentConfig c =
      ConfigFromJson(Json::parse(R"({"setting": "S3", "reps": 3, "fixed": {"n": 40}})"));
  EXPECT_EQ(c.reps, 3);
  EXPECT_EQ(c.fixed.n, 40);
  EXPECT_EQ(c.fixed.r, 3);
  EXPECT_EQ(c.grid, DefaultConfig(Setting::kS3, Scale::kSmall).grid);
}

TEST(ConfigJsonTest, BadInputRaisesConfigError) {
  EXPECT_THROW(ConfigFromJson(Json::parse(R"({"setting": "S9"})")), ConfigError);
  EXPECT_THROW(ConfigFromJson(Json::parse(R"({"reps": "many"})")), ConfigError);
  EXPECT_THROW(ConfigFromJson(Json::parse(R"({"methods": ["pca"]})")), ConfigError);
  EXPECT_THROW(ConfigFromJson(Json::parse(R"({"fixed": {"dist": "cauchy"}})")), ConfigError);
}

TEST(ConfigJsonTest, ReadJsonFile) {
  const auto path = std::filesystem::temp_directory_path() / "dpspectra_config_test.json";
  {
    std::ofstream out(path);
    out << "{not json";
  }
  EXPECT_THROW(ReadJsonFile(path.string()), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"setting": "S1b"})";
  }
  EXPECT_EQ(ReadJsonFile(path.string()).at("setting"), "S1b");
  std::filesystem::remove(path);
  EXPECT_THROW(ReadJsonFile(path.string()), IoError);
}

}  // namespace
}  // namespace dpspectra
