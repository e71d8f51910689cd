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

// Closed-form sensitivity calibration for the private spectral estimators and
// Monte-Carlo probes that measure the realized sensitivities on neighboring
// datasets. Logarithms are natural throughout.

#ifndef DPSPECTRA_SENSITIVITY_HPP_
#define DPSPECTRA_SENSITIVITY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/spiked_model.hpp"
#include "dpspectra/stats.hpp"

namespace dpspectra {

namespace sensitivity_internal {

inline void RequirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("sensitivity: ") + name + " must be positive and finite");
  }
}

inline void RequireNonNegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("sensitivity: ") + name + " must be non-negative and finite");
  }
}

}  // namespace sensitivity_internal

// Projector sensitivity c (sigma^2/lambda + sqrt(sigma^2/lambda)) sqrt(p (r + ln n)) / n.
inline double Delta1(double lambda, double sigma2, long p, long r, long n, double c) {
  using namespace sensitivity_internal;
  RequirePositive(lambda, "lambda");
  RequireNonNegative(sigma2, "sigma2");
  RequireNonNegative(c, "c");
  if (p < 1 || r < 1 || n < 1) throw DomainError("Delta1: p, r, n must be >= 1");
  const double ratio = sigma2 / lambda;
  const double nn = static_cast<double>(n);
  return c * (ratio + std::sqrt(ratio)) *
         std::sqrt(static_cast<double>(p) * (static_cast<double>(r) + std::log(nn))) / nn;
}

// Projector sensitivity when the spikes have condition number kappa0:
// c (sigma^2/lambda_r + sqrt(kappa0 sigma^2/lambda_r)) sqrt(p (r + ln n)) / n.
inline double Delta1DivergingKappa(double lambda_r, double kappa0, double sigma2, long p,
                                   long r, long n, double c) {
  using namespace sensitivity_internal;
  RequirePositive(lambda_r, "lambda_r");
  RequireNonNegative(sigma2, "sigma2");
  RequireNonNegative(c, "c");
  if (!(kappa0 >= 1.0)) throw DomainError("Delta1DivergingKappa: kappa0 must be >= 1");
  if (p < 1 || r < 1 || n < 1) throw DomainError("Delta1DivergingKappa: p, r, n must be >= 1");
  const double ratio = sigma2 / lambda_r;
  const double nn = static_cast<double>(n);
  return c * (ratio + std::sqrt(kappa0 * ratio)) *
         std::sqrt(static_cast<double>(p) * (static_cast<double>(r) + std::log(nn))) / nn;
}

// Eigenvalue sensitivity c (lambda (r + ln n) + sigma^2 (p + ln n)) / n.
inline double Delta2(double lambda, double sigma2, long p, long r, long n, double c) {
  using namespace sensitivity_internal;
  RequireNonNegative(lambda, "lambda");
  RequireNonNegative(sigma2, "sigma2");
  RequireNonNegative(c, "c");
  if (p < 1 || r < 1 || n < 1) throw DomainError("Delta2: p, r, n must be >= 1");
  const double nn = static_cast<double>(n);
  const double logn = std::log(nn);
  return c * (lambda * (static_cast<double>(r) + logn) + sigma2 * (static_cast<double>(p) + logn)) / nn;
}

// Sensitivity of the bulk noise-level estimator: Delta2(c = 1) c / sqrt(min(p, n)).
inline double Delta3(double lambda, double sigma2, long p, long r, long n, double c) {
  sensitivity_internal::RequireNonNegative(c, "c");
  return Delta2(lambda, sigma2, p, r, n, 1.0) * c / std::sqrt(static_cast<double>(std::min(p, n)));
}

enum class KappaRegime { kBounded, kDiverging };

inline std::string_view ToString(KappaRegime r) {
  return r == KappaRegime::kBounded ? "bounded_kappa" : "diverging_kappa";
}

struct SensitivityConstants {
  double c_proj = 4.0;
  double c_eig = 4.0;
  double c_sigma = 4.0;
};

struct SensitivityBundle {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  SensitivityConstants constants;
  KappaRegime regime = KappaRegime::kBounded;
};

// Calibrates all three sensitivities. `lambda` is the smallest spike
// lambda_r; in the diverging regime Delta1 uses kappa0 and Delta2 uses
// lambda_1 = kappa0 lambda_r.
inline SensitivityBundle Calibrate(double lambda, double sigma2, long p, long r, long n,
                                   const SensitivityConstants& c,
                                   KappaRegime regime = KappaRegime::kBounded,
                                   double kappa0 = 1.0) {
  SensitivityBundle b;
  b.constants = c;
  b.regime = regime;
  if (regime == KappaRegime::kBounded) {
    b.delta1 = Delta1(lambda, sigma2, p, r, n, c.c_proj);
    b.delta2 = Delta2(lambda, sigma2, p, r, n, c.c_eig);
  } else {
    b.delta1 = Delta1DivergingKappa(lambda, kappa0, sigma2, p, r, n, c.c_proj);
    b.delta2 = Delta2(kappa0 * lambda, sigma2, p, r, n, c.c_eig);
  }
  b.delta3 = Delta3(lambda, sigma2, p, r, n, c.c_sigma);
  return b;
}

struct ProbeStats {
  std::vector<double> values;  // one per trial, in trial order
  double max = 0.0;
  double mean = 0.0;
  double p99 = 0.0;

  // Fraction of trials whose value is <= bound.
  double FractionWithin(double bound) const {
    if (values.empty()) return 0.0;
    const auto hits = std::count_if(values.begin(), values.end(), [&](double v) { return v <= bound; });
    return static_cast<double>(hits) / static_cast<double>(values.size());
  }
};

struct EigenvalueProbeStats : ProbeStats {
  // ||Sigma_hat - Sigma_hat^(i)||_F per trial.
  std::vector<double> frobenius_bounds;
  // Trials violating sqrt(sum_k (lambda_k - lambda_k^(i))^2) <= ||Sigma_hat -
  // Sigma_hat^(i)||_F beyond rounding. Always zero for a correct eigensolver.
  int hoffman_wielandt_violations = 0;
};

namespace sensitivity_internal {

inline void Finalize(ProbeStats& s) {
  if (s.values.empty()) return;
  s.max = *std::max_element(s.values.begin(), s.values.end());
  s.mean = Mean(s.values);
  s.p99 = QuantileType7(s.values, 0.99);
}

struct NeighborPair {
  SymmetricMatrix cov;
  SymmetricMatrix neighbor_cov;
  SymmetricMatrix diff;
};

inline NeighborPair DrawNeighborPair(const SpikedModel& model, long n, SampleDistribution dist,
                                     std::uint64_t seed) {
  Rng rng(seed);
  const DataMatrix x = Sample(model, n, dist, rng);
  const auto i = static_cast<Eigen::Index>(
      std::uniform_int_distribution<long>(0, n - 1)(rng));
  const Vector fresh = DrawColumn(model, dist, rng);
  SymmetricMatrix diff = NeighborCovarianceDelta(x, i, fresh);
  SymmetricMatrix neighbor = x.SampleCov() + diff;
  return {x.SampleCov(), std::move(neighbor), std::move(diff)};
}

}  // namespace sensitivity_internal

// Draws `trials` datasets, replaces a uniformly chosen column of each with a
// fresh draw, and records ||U_hat U_hat^T - U_hat^(i) U_hat^(i)^T||_F.
inline ProbeStats EmpiricalProjectorSensitivity(const SpikedModel& model, long n, long r,
                                                int trials, Rng& rng,
                                                SampleDistribution dist = SampleDistribution::kGaussian) {
  if (trials < 1) throw DomainError("EmpiricalProjectorSensitivity: trials must be >= 1");
  const std::uint64_t base = rng();
  ProbeStats s;
  s.values.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const auto pair = sensitivity_internal::DrawNeighborPair(model, n, dist, DeriveSeed(base, t));
    s.values.push_back(ProjectionDistance(TopR(pair.cov, r), TopR(pair.neighbor_cov, r),
                                          SchattenOrder::Frobenius()));
  }
  sensitivity_internal::Finalize(s);
  return s;
}

// Same protocol for sqrt(sum_k (lambda_k(Sigma_hat) - lambda_k(Sigma_hat^(i)))^2).
inline EigenvalueProbeStats EmpiricalEigenvalueSensitivity(
    const SpikedModel& model, long n, int trials, Rng& rng,
    SampleDistribution dist = SampleDistribution::kGaussian) {
  if (trials < 1) throw DomainError("EmpiricalEigenvalueSensitivity: trials must be >= 1");
  const std::uint64_t base = rng();
  EigenvalueProbeStats s;
  s.values.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const auto pair = sensitivity_internal::DrawNeighborPair(model, n, dist, DeriveSeed(base, t));
    const Vector a = EigSym(pair.cov).eigenvalues;
    const Vector b = EigSym(pair.neighbor_cov).eigenvalues;
    const double stat = (a - b).norm();
    const double fro = pair.diff.frobenius();
    if (stat > fro * (1.0 + 1e-9) + 1e-12 * (a.cwiseAbs().maxCoeff() + 1.0)) {
      ++s.hoffman_wielandt_violations;
    }
    s.values.push_back(stat);
    s.frobenius_bounds.push_back(fro);
  }
  sensitivity_internal::Finalize(s);
  return s;
}

}  // namespace dpspectra

#endif  // DPSPECTRA_SENSITIVITY_HPP_
