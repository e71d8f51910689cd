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

// The Gaussian mechanism and the private PCA / spiked-covariance pipeline:
// a noised spectral projector for the eigenvectors, a noised r x r compressed
// covariance for the eigenvalues, and optional private estimates of the noise
// level, the rank and the spike strength.
//
// The privacy guarantee is per dataset and holds with high probability over
// the sampling of the data: observations are never truncated, and the
// sensitivities are calibrated to the spiked model rather than to a
// worst-case norm bound.

#ifndef DPSPECTRA_MECHANISMS_HPP_
#define DPSPECTRA_MECHANISMS_HPP_

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/mp_law.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/sensitivity.hpp"
#include "dpspectra/spiked_model.hpp"

namespace dpspectra {

enum class BudgetSplit { kHalves, kThirds };

inline std::string_view ToString(BudgetSplit s) {
  return s == BudgetSplit::kHalves ? "halves" : "thirds";
}

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.1;
  BudgetSplit split = BudgetSplit::kHalves;

  void Validate() const {
    if (!(epsilon > 0.0) || std::isnan(epsilon)) {
      throw ConfigError("PrivacyBudget: epsilon must be > 0");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ConfigError("PrivacyBudget: delta must lie in (0, 1)");
    }
  }
};

// (epsilon_i, delta_i) spent by one sub-mechanism.
struct StageBudget {
  std::string name;
  double epsilon = 0.0;
  double delta = 0.0;
};

// Gaussian mechanism variance 2 omega^2 eps^-2 ln(1.25 / delta).
inline double GaussianMechanismVariance(double omega, double epsilon, double delta) {
  return 2.0 * omega * omega / (epsilon * epsilon) * std::log(1.25 / delta);
}

// Per-entry variance of the projector and eigenvalue noise in the two-stage
// pipeline at total budget (epsilon, delta): 8 Delta^2 eps^-2 ln(2.5 / delta),
// i.e. the Gaussian mechanism at (epsilon/2, delta/2).
inline double PipelineNoiseVariance(double sensitivity, double epsilon, double delta) {
  return 8.0 * sensitivity * sensitivity / (epsilon * epsilon) * std::log(2.5 / delta);
}

// Variance of the noise added to the bulk noise-level estimator at total
// budget (epsilon, delta): 18 (Delta3 / eps)^2 ln(3.75 / delta), i.e. the
// Gaussian mechanism at (epsilon/3, delta/3).
inline double Sigma2NoiseVariance(double delta3, double epsilon, double delta) {
  return 18.0 * (delta3 / epsilon) * (delta3 / epsilon) * std::log(3.75 / delta);
}

// p x p symmetric matrix whose upper triangle (diagonal included) is i.i.d.
// N(0, sd^2), drawn column by column, and mirrored below the diagonal.
inline SymmetricMatrix SymmetricGaussianNoise(Eigen::Index p, double sd, Rng& rng) {
  Matrix z(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) z(i, j) = sd * StandardNormal(rng);
  }
  return SymmetricMatrix(z, SymmetricMatrix::Source::kUpper);
}

namespace mechanisms_internal {

inline void ValidateEpsDelta(double epsilon, double delta) {
  PrivacyBudget{epsilon, delta, BudgetSplit::kHalves}.Validate();
}

inline void ValidateSensitivity(double s, const char* what) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw ConfigError(std::string(what) + ": sensitivity must be finite and >= 0");
  }
}

inline SymmetricMatrix AddNoise(const SymmetricMatrix& m, double sd, Rng& rng) {
  if (sd == 0.0) return m;
  return m + SymmetricGaussianNoise(m.dim(), sd, rng);
}

}  // namespace mechanisms_internal

// M + Z with Z symmetric, entries N(0, 2 omega^2 eps^-2 ln(1.25/delta)).
inline SymmetricMatrix GaussianMechanismMatrix(const SymmetricMatrix& m, double omega,
                                               double epsilon, double delta, Rng& rng) {
  mechanisms_internal::ValidateEpsDelta(epsilon, delta);
  mechanisms_internal::ValidateSensitivity(omega, "GaussianMechanismMatrix");
  const double sd = std::sqrt(GaussianMechanismVariance(omega, epsilon, delta));
  return mechanisms_internal::AddNoise(m, sd, rng);
}

// Private principal subspace: top-r eigenvectors of U_hat U_hat^T + Z where
// U_hat spans the top-r sample eigenvectors and Z has per-entry variance
// 8 Delta1^2 eps^-2 ln(2.5/delta). `budget` is the pipeline total; this stage
// spends half of it.
inline OrthonormalFactor DpPca(const DataMatrix& x, long r, double delta1,
                               const PrivacyBudget& budget, Rng& rng) {
  budget.Validate();
  mechanisms_internal::ValidateSensitivity(delta1, "DpPca");
  if (r < 1 || r > x.p()) {
    throw DimensionError("DpPca: rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(x.p()) + "]");
  }
  const OrthonormalFactor u_hat = TopR(x.SampleCov(), r);
  const double var = PipelineNoiseVariance(delta1, budget.epsilon, budget.delta);
  assert(std::abs(var - GaussianMechanismVariance(delta1, budget.epsilon / 2.0, budget.delta / 2.0)) <=
         1e-12 * var);
  const double sd = std::sqrt(var);
  return TopR(mechanisms_internal::AddNoise(u_hat.Projector(), sd, rng), r);
}

// U~^T (Sigma_hat - sigma^2 I) U~ + E with E symmetric r x r, per-entry
// variance 8 Delta2^2 eps^-2 ln(2.5/delta). The result is a full r x r
// matrix: it absorbs the unknown rotation between U~ and U_hat.
inline SymmetricMatrix DpEigenvalues(const DataMatrix& x, const OrthonormalFactor& u_tilde,
                                     double sigma2, double delta2, const PrivacyBudget& budget,
                                     Rng& rng) {
  budget.Validate();
  mechanisms_internal::ValidateSensitivity(delta2, "DpEigenvalues");
  if (u_tilde.rows() != x.p()) {
    throw DimensionError("DpEigenvalues: factor has " + std::to_string(u_tilde.rows()) +
                         " rows, data has p=" + std::to_string(x.p()));
  }
  const Matrix& u = u_tilde.matrix();
  Matrix compressed = u.transpose() * x.SampleCov().matrix() * u;
  compressed.diagonal().array() -= sigma2;
  const double sd = std::sqrt(PipelineNoiseVariance(delta2, budget.epsilon, budget.delta));
  return mechanisms_internal::AddNoise(SymmetricMatrix(compressed), sd, rng);
}

// U~ Lambda~ U~^T + sigma^2 I. Not projected onto the PSD cone.
inline SymmetricMatrix DpCovariance(const OrthonormalFactor& u_tilde,
                                    const SymmetricMatrix& lambda_tilde, double sigma2) {
  if (lambda_tilde.dim() != u_tilde.cols()) {
    throw DimensionError("DpCovariance: Lambda~ is " + std::to_string(lambda_tilde.dim()) +
                         "x" + std::to_string(lambda_tilde.dim()) + " for rank " +
                         std::to_string(u_tilde.cols()));
  }
  const Matrix& u = u_tilde.matrix();
  Matrix s = u * lambda_tilde.matrix() * u.transpose();
  s.diagonal().array() += sigma2;
  return SymmetricMatrix(s);
}

// Optional post-processing: clips negative eigenvalues at zero.
inline SymmetricMatrix PsdProject(const SymmetricMatrix& m) {
  const SpectralDecomposition eig = EigSym(m);
  const Matrix& v = eig.eigenvectors.matrix();
  return SymmetricMatrix(v * eig.eigenvalues.cwiseMax(0.0).asDiagonal() * v.transpose());
}

// |sigma_hat^2 + N(0, 18 (Delta3/eps)^2 ln(3.75/delta))|, an (eps/3, delta/3)
// release when (epsilon, delta) is the full budget.
inline double DpSigma2(const DataMatrix& x, double delta3, double epsilon, double delta, Rng& rng) {
  mechanisms_internal::ValidateEpsDelta(epsilon, delta);
  mechanisms_internal::ValidateSensitivity(delta3, "DpSigma2");
  const double hat = Sigma2Hat(x.SampleEigenvalues(), x.p(), x.n());
  const double var = Sigma2NoiseVariance(delta3, epsilon, delta);
  assert(std::abs(var - GaussianMechanismVariance(delta3, epsilon / 3.0, delta / 3.0)) <= 1e-12 * var);
  const double sd = std::sqrt(var);
  if (sd == 0.0) return hat;
  return std::abs(hat + sd * StandardNormal(rng));
}

// Eigen-ratio rank estimator: argmax over 1 <= k <= R of
// (lambda_k + Z_k) / (lambda_{k+1} + Z_{k+1}). Ratios whose noised
// denominator is <= 0 are excluded; ties go to the smallest k. Returns a
// 1-based rank.
inline long DpRank(const Vector& eigs, double delta2, double epsilon, double delta, long max_rank,
                   Rng& rng) {
  mechanisms_internal::ValidateEpsDelta(epsilon, delta);
  mechanisms_internal::ValidateSensitivity(delta2, "DpRank");
  if (max_rank < 1 || max_rank + 1 > eigs.size()) {
    throw DimensionError("DpRank: R=" + std::to_string(max_rank) + " needs R+1 <= " +
                         std::to_string(eigs.size()) + " eigenvalues");
  }
  const double sd = std::sqrt(PipelineNoiseVariance(delta2, epsilon, delta));
  Vector noised = eigs.head(max_rank + 1);
  if (sd > 0.0) {
    for (Eigen::Index k = 0; k <= max_rank; ++k) noised(k) += sd * StandardNormal(rng);
  }
  long best = 1;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < max_rank; ++k) {
    if (!(noised(k + 1) > 0.0)) continue;
    const double ratio = noised(k) / noised(k + 1);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<long>(k) + 1;
    }
  }
  return best;
}

// Average of the top r sample eigenvalues, each perturbed by
// N(0, 8 Delta2^2 eps^-2 ln(2.5/delta)). The sample eigenvalues estimate
// lambda + sigma^2; sigma^2 is not subtracted.
inline double DpLambda(const Vector& eigs, long r, double delta2, double epsilon, double delta,
                       Rng& rng) {
  mechanisms_internal::ValidateEpsDelta(epsilon, delta);
  mechanisms_internal::ValidateSensitivity(delta2, "DpLambda");
  if (r < 1 || r > eigs.size()) {
    throw DimensionError("DpLambda: r=" + std::to_string(r) + " outside [1, " +
                         std::to_string(eigs.size()) + "]");
  }
  const double sd = std::sqrt(PipelineNoiseVariance(delta2, epsilon, delta));
  double sum = 0.0;
  for (Eigen::Index k = 0; k < r; ++k) {
    sum += eigs(k);
    if (sd > 0.0) sum += sd * StandardNormal(rng);
  }
  return sum / static_cast<double>(r);
}

struct KnownSigma2 {
  double value;
};
struct PrivateSigma2 {
  // Public value used only to calibrate Delta3 (an a-priori guess or upper
  // bound for sigma^2); the released estimate never depends on it except
  // through the noise scale.
  double calibration;
};

struct EstimateRequest {
  long r = 1;
  // Smallest spike strength lambda_r, treated as public.
  double lambda = 1.0;
  std::variant<KnownSigma2, PrivateSigma2> sigma2 = KnownSigma2{1.0};
  PrivacyBudget budget;
  SensitivityConstants constants;
  KappaRegime regime = KappaRegime::kBounded;
  double kappa0 = 1.0;
  std::uint64_t seed = 0;
};

struct DpEstimate {
  OrthonormalFactor u_tilde;
  SymmetricMatrix lambda_tilde;
  SymmetricMatrix sigma_tilde;
  double sigma2_used = 0.0;
  bool sigma2_private = false;
  double noise_sd_projector = 0.0;
  double noise_sd_eigs = 0.0;
  double noise_sd_sigma2 = 0.0;
  PrivacyBudget budget;
  std::vector<StageBudget> stages;
  SensitivityBundle sensitivities;
  std::uint64_t seed = 0;
  long p = 0;
  long n = 0;
  long r = 0;
  double lambda = 0.0;
  std::vector<std::string> warnings;
};

// End-to-end private estimate of the principal subspace and the spiked
// covariance. With a known sigma^2 the budget splits in halves between the
// projector and eigenvalue stages; with a private sigma^2 it splits in thirds
// and the noise level is released first, then plugged into Delta1, Delta2 and
// the eigenvalue stage.
inline DpEstimate EstimateDp(const DataMatrix& x, const EstimateRequest& req) {
  req.budget.Validate();
  const long p = x.p();
  const long n = x.n();
  if (req.r < 1 || 2 * req.r > p) {
    throw DimensionError("EstimateDp: need 1 <= r <= p/2, got r=" + std::to_string(req.r) +
                         " p=" + std::to_string(p));
  }
  if (!(req.lambda > 0.0)) throw ConfigError("EstimateDp: lambda must be > 0");

  Rng rng(req.seed);
  DpEstimate est;
  est.budget = req.budget;
  est.seed = req.seed;
  est.p = p;
  est.n = n;
  est.r = req.r;
  est.lambda = req.lambda;

  const double eps = req.budget.epsilon;
  const double del = req.budget.delta;
  PrivacyBudget pipeline = req.budget;

  if (const auto* known = std::get_if<KnownSigma2>(&req.sigma2)) {
    if (!(known->value > 0.0)) throw ConfigError("EstimateDp: sigma2 must be > 0");
    est.budget.split = BudgetSplit::kHalves;
    est.sigma2_used = known->value;
    est.sensitivities = Calibrate(req.lambda, est.sigma2_used, p, req.r, n, req.constants,
                                  req.regime, req.kappa0);
    est.stages = {{"projector", eps / 2.0, del / 2.0}, {"eigenvalues", eps / 2.0, del / 2.0}};
  } else {
    const auto& priv = std::get<PrivateSigma2>(req.sigma2);
    if (!(priv.calibration > 0.0)) throw ConfigError("EstimateDp: sigma2 calibration must be > 0");
    est.budget.split = BudgetSplit::kThirds;
    est.sigma2_private = true;
    const SensitivityBundle pre = Calibrate(req.lambda, priv.calibration, p, req.r, n,
                                            req.constants, req.regime, req.kappa0);
    est.noise_sd_sigma2 = std::sqrt(Sigma2NoiseVariance(pre.delta3, eps, del));
    est.sigma2_used = DpSigma2(x, pre.delta3, eps, del, rng);
    est.sensitivities = Calibrate(req.lambda, est.sigma2_used, p, req.r, n, req.constants,
                                  req.regime, req.kappa0);
    est.sensitivities.delta3 = pre.delta3;
    // Each remaining stage gets (eps/3, delta/3): the two-stage pipeline runs
    // at a total of (2 eps/3, 2 delta/3).
    pipeline.epsilon = 2.0 * eps / 3.0;
    pipeline.delta = 2.0 * del / 3.0;
    est.stages = {{"sigma2", eps / 3.0, del / 3.0},
                  {"projector", eps / 3.0, del / 3.0},
                  {"eigenvalues", eps / 3.0, del / 3.0}};
  }

  const double ratio = static_cast<double>(p) / static_cast<double>(n);
  if (req.lambda / est.sigma2_used < ratio + std::sqrt(ratio)) {
    est.warnings.push_back("signal strength lambda/sigma^2 is below p/n + sqrt(p/n)");
  }

  est.noise_sd_projector =
      std::sqrt(PipelineNoiseVariance(est.sensitivities.delta1, pipeline.epsilon, pipeline.delta));
  est.noise_sd_eigs =
      std::sqrt(PipelineNoiseVariance(est.sensitivities.delta2, pipeline.epsilon, pipeline.delta));
  est.u_tilde = DpPca(x, req.r, est.sensitivities.delta1, pipeline, rng);
  est.lambda_tilde = DpEigenvalues(x, est.u_tilde, est.sigma2_used, est.sensitivities.delta2,
                                   pipeline, rng);
  est.sigma_tilde = DpCovariance(est.u_tilde, est.lambda_tilde, est.sigma2_used);
  return est;
}

}  // namespace dpspectra

#endif  // DPSPECTRA_MECHANISMS_HPP_
