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

#include "dpspectra/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dpspectra/data_io.hpp"
#include "dpspectra/errors.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/stats.hpp"

namespace dpspectra {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig c = DefaultConfig(Setting::kS1a, Scale::kSmall);
  c.grid = {1000, 10000};
  c.reps = 2;
  c.methods = {Method::kOurs};
  c.seed = 7;
  return c;
}

std::string ToCsv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  WriteResultsCsv(os, rows);
  return os.str();
}

ResultRow Row(std::string method, double param, double value) {
  ResultRow r;
  r.setting = "S1a";
  r.method = std::move(method);
  r.param_name = "n";
  r.param_value = param;
  r.metric = "subspace_fro";
  r.value = value;
  return r;
}

TEST(SettingTest, NamesRoundTrip) {
  for (Setting s : {Setting::kS1a, Setting::kS1b, Setting::kS2a, Setting::kS2b, Setting::kS3,
                    Setting::kS4, Setting::kCustom}) {
    EXPECT_EQ(ParseSetting(ToString(s)), s);
  }
  for (Method m : {Method::kOurs, Method::kDpOja, Method::kDpGauss, Method::kDpGaussStar}) {
    EXPECT_EQ(ParseMethod(ToString(m)), m);
  }
  EXPECT_EQ(ParseScale("paper"), Scale::kPaper);
  EXPECT_THROW(ParseSetting("S5"), ConfigError);
  EXPECT_THROW(ParseMethod("pca"), ConfigError);
  EXPECT_THROW(ParseScale("huge"), ConfigError);
}

TEST(MetricSpecTest, Parse) {
  EXPECT_EQ(MetricSpec::Parse("cov_spec").Name(), "cov_spec");
  EXPECT_TRUE(MetricSpec::Parse("cov_fro").is_covariance());
  const MetricSpec s = MetricSpec::Parse("schatten(3)");
  EXPECT_EQ(s.kind, MetricSpec::Kind::kSchatten);
  EXPECT_EQ(s.q, 3.0);
  EXPECT_EQ(MetricSpec::Parse(s.Name()).q, 3.0);
  EXPECT_TRUE(std::isinf(MetricSpec::Parse("schatten(inf)").q));
  EXPECT_THROW(MetricSpec::Parse("schatten(0.5)"), ConfigError);
  EXPECT_THROW(MetricSpec::Parse("schatten(x)"), ConfigError);
  EXPECT_THROW(MetricSpec::Parse("frobenius"), ConfigError);
}

TEST(DefaultConfigTest, AllSettingsValidate) {
  for (Setting s : {Setting::kS1a, Setting::kS1b, Setting::kS2a, Setting::kS2b, Setting::kS3,
                    Setting::kS4}) {
    for (Scale scale : {Scale::kSmall, Scale::kPaper}) {
      EXPECT_NO_THROW(Validate(DefaultConfig(s, scale))) << ToString(s);
    }
  }
  EXPECT_EQ(DefaultConfig(Setting::kS3, Scale::kSmall).fixed.n, 30);
  EXPECT_EQ(DefaultConfig(Setting::kS2b, Scale::kPaper).fixed.r, 5);
}

TEST(ValidateTest, RejectsBadConfigs) {
  ExperimentConfig c = SmallConfig();
  c.reps = 0;
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.param_name = "seed";
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.grid = {-1};
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.fixed.p = 5000;
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.fixed.epsilon = 0;
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.fixed.r = 2;
  c.methods = {Method::kDpOja};
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.methods = {Method::kDpOja};
  c.metrics = {MetricSpec::Parse("cov_fro")};
  EXPECT_THROW(Validate(c), ConfigError);

  c = SmallConfig();
  c.fixed.p = 4;
  c.fixed.r = 3;
  EXPECT_THROW(Validate(c), ConfigError);

  c = DefaultConfig(Setting::kCustom, Scale::kSmall);
  EXPECT_THROW(Validate(c), ConfigError);
  c.data_path = "x.csv";
  c.param_name = "n";
  EXPECT_THROW(Validate(c), ConfigError);
}

TEST(RunExperimentTest, RowLayout) {
  ExperimentConfig c = SmallConfig();
  c.methods = {Method::kOurs, Method::kDpGauss};
  c.metrics = {MetricSpec{}, MetricSpec::Parse("cov_spec")};
  const auto rows = RunExperiment(c);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u * 2u);
  EXPECT_EQ(rows.front().method, "ours");
  EXPECT_EQ(rows.back().method, "dp_gauss");
  EXPECT_EQ(rows[0].metric, "subspace_fro");
  EXPECT_EQ(rows[1].metric, "cov_spec");
  EXPECT_EQ(rows[2].rep, 1);
  EXPECT_EQ(rows[4].param_value, 10000);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.value)) << r.error;
    EXPECT_EQ(r.ms, 0.0);
  }
}

TEST(RunExperimentTest, FiniteSubspaceErrors) {
  const auto rows = RunExperiment(SmallConfig());
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_GE(r.value, 0.0);
    EXPECT_LE(r.value, std::sqrt(2.0) + 1e-12);
  }
}

TEST(RunExperimentTest, BitIdenticalRerun) {
  ExperimentConfig c = SmallConfig();
  c.methods = {Method::kOurs, Method::kDpOja, Method::kDpGauss, Method::kDpGaussStar};
  c.threads = 1;
  const std::string a = ToCsv(RunExperiment(c));
  c.threads = 3;
  EXPECT_EQ(a, ToCsv(RunExperiment(c)));
}

TEST(RunExperimentTest, DataStreamIndependentOfMethods) {
  ExperimentConfig c = SmallConfig();
  c.fixed.constants = {0.0, 0.0, 0.0};
  const auto alone = RunExperiment(c);
  c.methods = {Method::kDpGauss, Method::kOurs};
  const auto both = RunExperiment(c);
  ASSERT_EQ(both.size(), 2 * alone.size());
  for (std::size_t i = 0; i < alone.size(); ++i) {
    EXPECT_EQ(alone[i].value, both[i + alone.size()].value);
    EXPECT_EQ(alone[i].seed, both[i + alone.size()].seed);
  }
  // With zero sensitivities the estimate is the sample eigenspace of the
  // replication's data stream.
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    for (int j = 0; j < c.reps; ++j) {
      Rng rng(DataSeed(c, g, j));
      const SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(c.fixed.p, 1, rng), 10.0, 1.0);
      const DataMatrix x = Sample(model, static_cast<long>(c.grid[g]), SampleDistribution::kGaussian, rng);
      const double expected = ProjectionDistance(TopR(x.SampleCov(), 1), model.u(), SchattenOrder::Frobenius());
      EXPECT_NEAR(alone[g * c.reps + j].value, expected, 1e-10);
    }
  }
}

TEST(RunExperimentTest, TimingIsOptIn) {
  ExperimentConfig c = SmallConfig();
  c.record_timing = true;
  const auto rows = RunExperiment(c);
  EXPECT_GT(rows.front().ms, 0.0);
}

TEST(RunExperimentTest, SubspaceErrorShrinksAtRootN) {
  ExperimentConfig c = SmallConfig();
  c.fixed.p = 20;
  c.fixed.constants = {0.0, 0.0, 0.0};
  c.grid = {500, 2000, 8000};
  c.reps = 20;
  const auto summary = Summarize(RunExperiment(c));
  ASSERT_EQ(summary.size(), 3u);
  std::vector<double> n;
  std::vector<double> err;
  for (const auto& s : summary) {
    n.push_back(s.param_value);
    err.push_back(s.mean);
  }
  const double slope = LogLogSlope(n, err);
  EXPECT_GE(slope, -0.65);
  EXPECT_LE(slope, -0.35);
}

TEST(RunExperimentTest, CustomData) {
  Rng rng(3);
  const SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(12, 2, rng), 20.0, 1.0);
  const DataMatrix x = Sample(model, 3000, SampleDistribution::kGaussian, rng);
  const auto path = std::filesystem::temp_directory_path() / "dpspectra_harness_custom.dpsp";
  SaveDataMatrix(path.string(), x);

  ExperimentConfig c = DefaultConfig(Setting::kCustom, Scale::kSmall);
  c.data_path = path.string();
  c.fixed.r = 2;
  c.grid = {1.0, 4.0};
  c.reps = 3;
  c.metrics = {MetricSpec{}, MetricSpec::Parse("cov_fro")};
  const auto rows = RunExperiment(c);
  ASSERT_EQ(rows.size(), 3u * 2u * 3u * 2u);
  for (const auto& r : rows) EXPECT_TRUE(std::isfinite(r.value)) << r.method << r.error;
  std::filesystem::remove(path);
}

TEST(RunExperimentTest, MissingCustomFileRaises) {
  ExperimentConfig c = DefaultConfig(Setting::kCustom, Scale::kSmall);
  c.data_path = "/nonexistent/dpspectra.csv";
  EXPECT_THROW(RunExperiment(c), IoError);
}

TEST(CustomReferenceTest, RecoversPlugIns) {
  Rng rng(4);
  const SpikedModel model = SpikedModel::Uniform(RandomOrthonormal(40, 2, rng), 10.0, 2.0);
  const DataMatrix x = Sample(model, 20000, SampleDistribution::kGaussian, rng);
  const auto ref = harness_internal::BuildCustomReference(x, 2);
  EXPECT_NEAR(ref.sigma2, 2.0, 0.1);
  EXPECT_NEAR(ref.lambda, 10.0, 1.0);
  EXPECT_LE(ProjectionDistance(ref.truth.u, model.u(), SchattenOrder::Frobenius()), 0.2);
  EXPECT_THROW(harness_internal::BuildCustomReference(x, 21), ConfigError);
}

TEST(CompleteCovarianceTest, FillsComplementWithNoiseLevel) {
  Rng rng(5);
  const OrthonormalFactor u = RandomOrthonormal(6, 2, rng);
  const SymmetricMatrix sigma_r(u.matrix() * Vector::Constant(2, 3.0).asDiagonal() * u.matrix().transpose());
  const SymmetricMatrix full = harness_internal::CompleteCovariance(sigma_r, u, 0.5);
  const Vector eig = EigSym(full).eigenvalues;
  EXPECT_NEAR(eig(0), 3.0, 1e-12);
  EXPECT_NEAR(eig(1), 3.0, 1e-12);
  for (int i = 2; i < 6; ++i) EXPECT_NEAR(eig(i), 0.5, 1e-12);
}

TEST(ResultsCsvTest, RoundTrip) {
  auto rows = RunExperiment(SmallConfig());
  rows[1].value = std::numeric_limits<double>::quiet_NaN();
  std::istringstream is(ToCsv(rows));
  const auto back = ReadResultsCsv(is);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].param_value, rows[i].param_value);
    if (i == 1) {
      EXPECT_TRUE(std::isnan(back[i].value));
    } else {
      EXPECT_EQ(back[i].value, rows[i].value);
    }
  }
  EXPECT_EQ(ToCsv(back), ToCsv(rows));
}

TEST(ResultsCsvTest, Header) {
  const std::string csv = ToCsv({});
  EXPECT_EQ(csv, "setting,method,param_name,param_value,rep,seed,metric,value,ms\n");
}

TEST(ResultsCsvTest, RejectsMalformed) {
  std::istringstream empty("");
  EXPECT_THROW(ReadResultsCsv(empty), IoError);
  std::istringstream header("a,b\n");
  EXPECT_THROW(ReadResultsCsv(header), IoError);
  std::istringstream fields(std::string(kResultCsvHeader) + "\nS1a,ours,n,1\n");
  EXPECT_THROW(ReadResultsCsv(fields), IoError);
  std::istringstream number(std::string(kResultCsvHeader) + "\nS1a,ours,n,x,0,1,subspace_fro,1,0\n");
  EXPECT_THROW(ReadResultsCsv(number), IoError);
}

TEST(SummarizeTest, ConstantValues) {
  const auto s = Summarize({Row("ours", 1, 0.5), Row("ours", 1, 0.5), Row("ours", 1, 0.5)});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].count, 3);
  EXPECT_EQ(s[0].mean, 0.5);
  EXPECT_EQ(s[0].sd, 0.0);
  EXPECT_EQ(s[0].se, 0.0);
}

TEST(SummarizeTest, TwoValues) {
  const auto s = Summarize({Row("ours", 1, 1.0), Row("ours", 1, 3.0)});
  EXPECT_EQ(s[0].mean, 2.0);
  EXPECT_NEAR(s[0].sd, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s[0].se, 1.0, 1e-15);
}

TEST(SummarizeTest, Quartiles) {
  const auto s = Summarize({Row("ours", 1, 4), Row("ours", 1, 2), Row("ours", 1, 1), Row("ours", 1, 3)});
  EXPECT_DOUBLE_EQ(s[0].q1, 1.75);
  EXPECT_DOUBLE_EQ(s[0].median, 2.5);
  EXPECT_DOUBLE_EQ(s[0].q3, 3.25);
}

TEST(SummarizeTest, FailedReplicationsCountedSeparately) {
  const auto s = Summarize({Row("ours", 1, 1.0), Row("ours", 1, std::numeric_limits<double>::quiet_NaN())});
  EXPECT_EQ(s[0].count, 1);
  EXPECT_EQ(s[0].failed, 1);
  EXPECT_EQ(s[0].mean, 1.0);
  const auto all_failed = Summarize({Row("ours", 1, std::numeric_limits<double>::quiet_NaN())});
  EXPECT_TRUE(std::isnan(all_failed[0].mean));
}

TEST(SummarizeTest, GroupsAndPermutationInvariance) {
  std::vector<ResultRow> rows;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  for (const char* m : {"ours", "dp_gauss"}) {
    for (double n : {100.0, 1000.0}) {
      for (int j = 0; j < 15; ++j) rows.push_back(Row(m, n, z(rng)));
    }
  }
  const auto a = Summarize(rows);
  ASSERT_EQ(a.size(), 4u);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto b = Summarize(rows);
  std::ostringstream sa;
  std::ostringstream sb;
  WriteSummaryCsv(sa, a);
  WriteSummaryCsv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), kSummaryCsvHeader);
}

TEST(SummarizeTest, EmptyInputRaises) { EXPECT_THROW(Summarize({}), DomainError); }

TEST(RateTest, ReferenceValues) {
  RateParams a;
  EXPECT_NEAR(SubspaceRate(a), 0.0413626494639168, 1e-15);
  EXPECT_NEAR(CovarianceRate(a), 0.4479083119774296, 1e-14);
}

TEST(RateTest, NonPrivateLimit) {
  RateParams a;
  a.epsilon = std::numeric_limits<double>::infinity();
  const double ratio = 0.1;
  EXPECT_NEAR(SubspaceRate(a), (ratio + std::sqrt(ratio)) * std::sqrt(50.0 / 1e4), 1e-15);
}

TEST(RateTest, Monotone) {
  RateParams a;
  double prev = 0.0;
  for (double p : {10.0, 20.0, 50.0, 100.0}) {
    a.p = p;
    EXPECT_GT(SubspaceRate(a), prev);
    prev = SubspaceRate(a);
  }
  RateParams b;
  prev = std::numeric_limits<double>::infinity();
  for (double n : {1e3, 1e4, 1e5}) {
    b.n = n;
    EXPECT_LT(CovarianceRate(b), prev);
    prev = CovarianceRate(b);
  }
}

}  // namespace
}  // namespace dpspectra
