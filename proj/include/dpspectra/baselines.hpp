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

// Comparison methods: noisy Oja iteration (rank one) and the Gaussian
// mechanism on a globally rescaled sample covariance, with either a
// model-based or a data-dependent scale.

#ifndef DPSPECTRA_BASELINES_HPP_
#define DPSPECTRA_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/mechanisms.hpp"
#include "dpspectra/random.hpp"
#include "dpspectra/spiked_model.hpp"

namespace dpspectra {

enum class BaselineMethod { kDpOja, kDpGauss, kDpGaussStar };

inline std::string_view ToString(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::kDpOja: return "dp_oja";
    case BaselineMethod::kDpGauss: return "dp_gauss";
    case BaselineMethod::kDpGaussStar: return "dp_gauss_star";
  }
  return "unknown";
}

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kDpGauss;
  // Oja step size; 0.5 / n when unset.
  std::optional<double> oja_stepsize;
  // Multiplier C on the Oja gradient-norm bound.
  double oja_constant = 0.2;
  // C5 in the DP-Gauss scale (r + C5 ln n) lambda + p sigma^2.
  double gauss_scaling_constant = 4.0;
  PrivacyBudget budget;
  // Scales every noise draw; 1 for the private methods, 0 to switch noise off
  // in tests.
  double noise_multiplier = 1.0;

  void Validate() const {
    budget.Validate();
    if (oja_stepsize && !(*oja_stepsize > 0.0)) throw ConfigError("BaselineConfig: stepsize must be > 0");
    if (!(oja_constant > 0.0)) throw ConfigError("BaselineConfig: oja_constant must be > 0");
    if (!(gauss_scaling_constant > 0.0)) {
      throw ConfigError("BaselineConfig: gauss_scaling_constant must be > 0");
    }
    if (!(noise_multiplier >= 0.0)) throw ConfigError("BaselineConfig: noise_multiplier must be >= 0");
  }
};

struct BaselineResult {
  BaselineMethod method = BaselineMethod::kDpGauss;
  OrthonormalFactor u_tilde;
  // Rank-r covariance reconstruction (DP-Gauss variants only).
  std::optional<SymmetricMatrix> sigma_r;
  // Global scale s dividing the sample covariance (DP-Gauss), or the
  // clipping threshold beta (DP-Oja).
  double scale = 0.0;
  double noise_sd = 0.0;
  // Samples with ||X_i||^2 > s (DP-Gauss), or clipped Oja updates.
  long violations = 0;
  // True when the scale is computed from the realized data, which voids the
  // worst-case guarantee.
  bool heuristic_privacy = false;
};

namespace baselines_internal {

inline BaselineResult GaussLowRank(const DataMatrix& x, long r, double scale,
                                   const BaselineConfig& config, Rng& rng) {
  if (r < 1 || r > x.p()) {
    throw DimensionError("DpGauss: rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(x.p()) + "]");
  }
  BaselineResult out;
  out.method = config.method;
  out.scale = scale;
  const Eigen::VectorXd norms2 = x.columns().colwise().squaredNorm();
  out.violations = static_cast<long>((norms2.array() > scale).count());

  // Replacing one unit-norm sample moves Sigma_hat / s by at most 2/n in
  // Frobenius norm.
  const double omega = 2.0 / static_cast<double>(x.n());
  out.noise_sd = config.noise_multiplier *
                 std::sqrt(GaussianMechanismVariance(omega, config.budget.epsilon, config.budget.delta));
  SymmetricMatrix scaled = (1.0 / scale) * x.SampleCov();
  if (out.noise_sd > 0.0) scaled = scaled + SymmetricGaussianNoise(x.p(), out.noise_sd, rng);

  const SpectralDecomposition eig = EigSym(scaled);
  out.u_tilde = TopR(eig, r);
  const Matrix& v = out.u_tilde.matrix();
  out.sigma_r = SymmetricMatrix(scale * (v * eig.eigenvalues.head(r).asDiagonal() * v.transpose()));
  return out;
}

}  // namespace baselines_internal

// Gaussian mechanism on Sigma_hat / s with s = (r + C5 ln n) lambda + p sigma^2,
// followed by the rank-r eigenspace and rescaling by s.
inline BaselineResult DpGauss(const DataMatrix& x, long r, double sigma2, double lambda,
                              const BaselineConfig& config, Rng& rng) {
  config.Validate();
  if (!(lambda > 0.0) || !(sigma2 >= 0.0)) throw ConfigError("DpGauss: need lambda > 0, sigma2 >= 0");
  const double s = (static_cast<double>(r) + config.gauss_scaling_constant *
                                                 std::log(static_cast<double>(x.n()))) *
                       lambda +
                   static_cast<double>(x.p()) * sigma2;
  BaselineConfig c = config;
  c.method = BaselineMethod::kDpGauss;
  return baselines_internal::GaussLowRank(x, r, s, c, rng);
}

// As DpGauss with s = max_i ||X_i||^2 computed from the data.
inline BaselineResult DpGaussStar(const DataMatrix& x, long r, const BaselineConfig& config, Rng& rng) {
  config.Validate();
  const double s = x.columns().colwise().squaredNorm().maxCoeff();
  if (!(s > 0.0)) throw DomainError("DpGaussStar: all samples are zero");
  BaselineConfig c = config;
  c.method = BaselineMethod::kDpGaussStar;
  BaselineResult out = baselines_internal::GaussLowRank(x, r, s, c, rng);
  out.heuristic_privacy = true;
  return out;
}

// High-probability bound on max_i ||X_i X_i^T w|| over unit w for n draws
// from a rank-one spiked model: sqrt(B_norm B_proj) with
//   B_norm = tr(Sigma) + 2 sqrt(||Sigma||_F^2 ln n) + 2 ||Sigma|| ln n,
//   B_proj = ||Sigma|| (1 + 2 sqrt(ln n) + 2 ln n),
// chi-square tail bounds for ||X||^2 and (w^T X)^2 at level 1/n.
inline double OjaGradientBound(double lambda, double sigma2, long p, long n) {
  const double u = std::log(static_cast<double>(std::max(n, 2L)));
  const double top = lambda + sigma2;
  const double trace = lambda + static_cast<double>(p) * sigma2;
  const double fro2 = top * top + static_cast<double>(p - 1) * sigma2 * sigma2;
  const double b_norm = trace + 2.0 * std::sqrt(fro2 * u) + 2.0 * top * u;
  const double b_proj = top * (1.0 + 2.0 * std::sqrt(u) + 2.0 * u);
  return std::sqrt(b_norm * b_proj);
}

// Single-pass noisy Oja iteration for the leading principal component:
//   w_i = normalize(w_{i-1} + eta (clip_beta(X_i X_i^T w_{i-1}) + 2 beta alpha g_i)),
// with beta = C * OjaGradientBound, alpha = sqrt(2 ln(1.25/delta)) / eps and
// g_i ~ N(0, I_p). Each update touches one sample, so every step is released
// at the full (eps, delta). Starts from a uniformly random unit vector.
inline BaselineResult DpOja(const DataMatrix& x, double lambda, double sigma2,
                            const BaselineConfig& config, Rng& rng) {
  config.Validate();
  const long p = x.p();
  const long n = x.n();
  const double eta = config.oja_stepsize.value_or(0.5 / static_cast<double>(n));
  const double beta = config.oja_constant * OjaGradientBound(lambda, sigma2, p, n);
  const double alpha = std::sqrt(2.0 * std::log(1.25 / config.budget.delta)) / config.budget.epsilon;
  const double noise_sd = config.noise_multiplier * 2.0 * beta * alpha;

  Vector w(p);
  for (long i = 0; i < p; ++i) w(i) = StandardNormal(rng);
  w.normalize();

  long clipped = 0;
  Vector g(p);
  for (long t = 0; t < n; ++t) {
    const auto xt = x.columns().col(t);
    g = xt * xt.dot(w);
    const double gn = g.norm();
    if (gn > beta) {
      g *= beta / gn;
      ++clipped;
    }
    if (noise_sd > 0.0) {
      for (long i = 0; i < p; ++i) g(i) += noise_sd * StandardNormal(rng);
    }
    w += eta * g;
    w.normalize();
  }

  BaselineResult out;
  out.method = BaselineMethod::kDpOja;
  out.u_tilde = OrthonormalFactor(Matrix(w));
  out.scale = beta;
  out.noise_sd = noise_sd;
  out.violations = clipped;
  return out;
}

}  // namespace dpspectra

#endif  // DPSPECTRA_BASELINES_HPP_
