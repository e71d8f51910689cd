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

// Spiked covariance model Sigma = U diag(lambda) U^T + sigma^2 I_p, samplers
// (Gaussian and two sub-Gaussian laws) and neighboring-dataset construction.

#ifndef DPSPECTRA_SPIKED_MODEL_HPP_
#define DPSPECTRA_SPIKED_MODEL_HPP_

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/random.hpp"

namespace dpspectra {

class SpikedModel {
 public:
  SpikedModel(OrthonormalFactor u, Vector spike_eigs, double sigma2)
      : u_(std::move(u)), spikes_(std::move(spike_eigs)), sigma2_(sigma2) {
    if (spikes_.size() != u_.cols()) {
      throw DimensionError("SpikedModel: " + std::to_string(spikes_.size()) +
                           " spike eigenvalues for rank " + std::to_string(u_.cols()));
    }
    if (spikes_.size() == 0) throw DimensionError("SpikedModel: rank must be >= 1");
    if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
      throw DomainError("SpikedModel: sigma2 must be positive and finite");
    }
    for (Eigen::Index k = 0; k < spikes_.size(); ++k) {
      if (!(spikes_(k) > 0.0) || !std::isfinite(spikes_(k))) {
        throw DomainError("SpikedModel: spike eigenvalues must be positive");
      }
      if (k > 0 && spikes_(k) > spikes_(k - 1)) {
        throw DomainError("SpikedModel: spike eigenvalues must be non-increasing");
      }
    }
  }

  // Equal spikes lambda_1 = ... = lambda_r = lambda.
  static SpikedModel Uniform(OrthonormalFactor u, double lambda, double sigma2) {
    const Eigen::Index r = u.cols();
    return SpikedModel(std::move(u), Vector::Constant(r, lambda), sigma2);
  }

  Eigen::Index p() const { return u_.rows(); }
  Eigen::Index r() const { return u_.cols(); }
  const OrthonormalFactor& u() const { return u_; }
  const Vector& spike_eigs() const { return spikes_; }
  double sigma2() const { return sigma2_; }
  double lambda_max() const { return spikes_(0); }
  double lambda_min() const { return spikes_(spikes_.size() - 1); }
  // Condition number of the spikes, lambda_1 / lambda_r.
  double kappa0() const { return lambda_max() / lambda_min(); }

 private:
  OrthonormalFactor u_;
  Vector spikes_;
  double sigma2_;
};

inline SymmetricMatrix CovarianceOf(const SpikedModel& model) {
  const Matrix& u = model.u().matrix();
  Matrix sigma = u * model.spike_eigs().asDiagonal() * u.transpose();
  sigma.diagonal().array() += model.sigma2();
  return SymmetricMatrix(sigma, SymmetricMatrix::Source::kUpper);
}

enum class SampleDistribution { kGaussian, kRademacher, kUniform };

inline std::string_view ToString(SampleDistribution d) {
  switch (d) {
    case SampleDistribution::kGaussian: return "gaussian";
    case SampleDistribution::kRademacher: return "rademacher_subgaussian";
    case SampleDistribution::kUniform: return "uniform_subgaussian";
  }
  return "unknown";
}

inline SampleDistribution ParseSampleDistribution(std::string_view s) {
  if (s == "gaussian") return SampleDistribution::kGaussian;
  if (s == "rademacher_subgaussian" || s == "rademacher") {
    return SampleDistribution::kRademacher;
  }
  if (s == "uniform_subgaussian" || s == "uniform") return SampleDistribution::kUniform;
  throw ConfigError("unknown sample distribution '" + std::string(s) + "'");
}

// p x n data matrix whose columns are samples. Immutable; the sample
// covariance n^-1 sum_i X_i X_i^T is computed once on first use and shared
// between copies.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix columns)
      : x_(std::make_shared<const Matrix>(std::move(columns))),
        cache_(std::make_shared<CovCache>()) {
    if (x_->rows() < 1 || x_->cols() < 1) {
      throw DimensionError("DataMatrix: need p >= 1 and n >= 1");
    }
    if (!x_->allFinite()) throw DomainError("DataMatrix: non-finite entry");
  }

  Eigen::Index p() const { return x_->rows(); }
  Eigen::Index n() const { return x_->cols(); }
  const Matrix& columns() const { return *x_; }

  const SymmetricMatrix& SampleCov() const {
    std::call_once(cache_->once, [this] {
      Matrix s = Matrix::Zero(p(), p());
      s.selfadjointView<Eigen::Lower>().rankUpdate(*x_, 1.0 / static_cast<double>(n()));
      cache_->value.emplace(s, SymmetricMatrix::Source::kLower);
    });
    return *cache_->value;
  }

  // Eigenvalues of the sample covariance, non-increasing.
  const Vector& SampleEigenvalues() const {
    std::call_once(cache_->eig_once, [this] {
      Eigen::SelfAdjointEigenSolver<Matrix> s(SampleCov().matrix(), Eigen::EigenvaluesOnly);
      if (s.info() != Eigen::Success) {
        throw SolverError("DataMatrix: eigensolver did not converge",
                          std::numeric_limits<double>::quiet_NaN());
      }
      cache_->eigs = s.eigenvalues().reverse();
    });
    return cache_->eigs;
  }

 private:
  struct CovCache {
    std::once_flag once;
    std::optional<SymmetricMatrix> value;
    std::once_flag eig_once;
    Vector eigs;
  };

  std::shared_ptr<const Matrix> x_;
  std::shared_ptr<CovCache> cache_;
};

namespace model_internal {

inline double UnitVarianceDraw(SampleDistribution dist, Rng& rng) {
  switch (dist) {
    case SampleDistribution::kGaussian:
      return StandardNormal(rng);
    case SampleDistribution::kRademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case SampleDistribution::kUniform: {
      const double s3 = std::sqrt(3.0);
      return std::uniform_real_distribution<double>(-s3, s3)(rng);
    }
  }
  return 0.0;
}

}  // namespace model_internal

// One draw from the model. Gaussian: U diag(sqrt(lambda)) z_r + sigma w_p.
// Sub-Gaussian: Sigma^{1/2} w with Sigma^{1/2} = U diag(sqrt(lambda_i +
// sigma^2) - sigma) U^T + sigma I applied in factored form.
inline Vector DrawColumn(const SpikedModel& model, SampleDistribution dist, Rng& rng) {
  const Eigen::Index p = model.p();
  const Eigen::Index r = model.r();
  const Matrix& u = model.u().matrix();
  const double sigma = std::sqrt(model.sigma2());
  if (dist == SampleDistribution::kGaussian) {
    Vector z(r);
    for (Eigen::Index k = 0; k < r; ++k) z(k) = StandardNormal(rng);
    Vector w(p);
    for (Eigen::Index i = 0; i < p; ++i) w(i) = StandardNormal(rng);
    return u * (model.spike_eigs().cwiseSqrt().cwiseProduct(z)) + sigma * w;
  }
  Vector w(p);
  for (Eigen::Index i = 0; i < p; ++i) w(i) = model_internal::UnitVarianceDraw(dist, rng);
  const Vector root =
      (model.spike_eigs().array() + model.sigma2()).sqrt().matrix() - Vector::Constant(r, sigma);
  return sigma * w + u * root.cwiseProduct(u.transpose() * w);
}

inline DataMatrix Sample(const SpikedModel& model, Eigen::Index n,
                         SampleDistribution dist, Rng& rng) {
  if (n < 1) throw DimensionError("Sample: n must be >= 1");
  Matrix x(model.p(), n);
  for (Eigen::Index j = 0; j < n; ++j) x.col(j) = DrawColumn(model, dist, rng);
  return DataMatrix(std::move(x));
}

// Replaces column i (0-based) with a fresh i.i.d. draw; every other column is
// copied bit for bit.
inline DataMatrix Neighbor(const DataMatrix& x, Eigen::Index i, const SpikedModel& model,
                           SampleDistribution dist, Rng& rng) {
  if (i < 0 || i >= x.n()) {
    throw DimensionError("Neighbor: index " + std::to_string(i) + " outside [0, " +
                         std::to_string(x.n()) + ")");
  }
  if (model.p() != x.p()) throw DimensionError("Neighbor: model and data dimensions differ");
  Matrix cols = x.columns();
  cols.col(i) = DrawColumn(model, dist, rng);
  return DataMatrix(std::move(cols));
}

// Sigma_hat^(i) - Sigma_hat when column i is replaced by `replacement`:
// n^-1 (x' x'^T - x x^T). Exactly zero when replacement equals the column.
inline SymmetricMatrix NeighborCovarianceDelta(const DataMatrix& x, Eigen::Index i,
                                               const Vector& replacement) {
  if (i < 0 || i >= x.n()) throw DimensionError("NeighborCovarianceDelta: index out of range");
  const Vector old = x.columns().col(i);
  const double inv_n = 1.0 / static_cast<double>(x.n());
  Matrix d = replacement * replacement.transpose() - old * old.transpose();
  return SymmetricMatrix(inv_n * d, SymmetricMatrix::Source::kUpper);
}

struct SnrReport {
  double snr = 0.0;             // lambda_r / sigma^2
  double threshold = 0.0;       // p/n + sqrt(p/n)
  bool pass = false;            // snr >= threshold
  double kappa0 = 1.0;          // lambda_1 / lambda_r
  double effective_rank = 0.0;  // tr(Sigma) / ||Sigma||
};

// Signal-strength diagnostics. With equal spikes the effective rank equals
// (r lambda + p sigma^2) / (lambda + sigma^2).
inline SnrReport SnrDiagnostics(const SpikedModel& model, Eigen::Index n) {
  if (n < 1) throw DimensionError("SnrDiagnostics: n must be >= 1");
  SnrReport rep;
  const double ratio = static_cast<double>(model.p()) / static_cast<double>(n);
  rep.snr = model.lambda_min() / model.sigma2();
  rep.threshold = ratio + std::sqrt(ratio);
  rep.pass = rep.snr >= rep.threshold;
  rep.kappa0 = model.kappa0();
  const double trace = model.spike_eigs().sum() + static_cast<double>(model.p()) * model.sigma2();
  rep.effective_rank = trace / (model.lambda_max() + model.sigma2());
  return rep;
}

}  // namespace dpspectra

#endif  // DPSPECTRA_SPIKED_MODEL_HPP_
