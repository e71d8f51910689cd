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

// Executable spectral representation of the perturbed principal projector of
// a spiked covariance matrix:
//
//   U_hat U_hat^T - U U^T = sum_{k >= 1} S_k(Delta),
//   S_k(Delta) = sum_s (-1)^(1 + tau(s)) Q^{-s_1} Delta Q^{-s_2} ... Delta Q^{-s_{k+1}},
//
// where s ranges over weak compositions of k into k + 1 parts, tau(s) counts
// the positive parts, Q^{-t} = U Lambda^{-t} U^T for t >= 1 and
// Q^0 = I - U U^T. Valid when 2 ||Delta|| <= lambda_r. Used as a test oracle,
// never by the estimators.

#ifndef DPSPECTRA_SPECTRAL_ORACLE_HPP_
#define DPSPECTRA_SPECTRAL_ORACLE_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"
#include "dpspectra/spiked_model.hpp"

namespace dpspectra {

inline constexpr int kMaxExpansionOrder = 8;

struct CompositionIndex {
  std::vector<int> s;
  int tau = 0;
};

// All weak compositions of k into k + 1 parts in lexicographic order;
// there are C(2k, k) of them.
inline std::vector<CompositionIndex> Compositions(int k) {
  if (k < 1) throw DomainError("Compositions: k must be >= 1");
  if (k > kMaxExpansionOrder) {
    throw DomainError("Compositions: k=" + std::to_string(k) + " exceeds the cap " +
                      std::to_string(kMaxExpansionOrder));
  }
  std::vector<CompositionIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(k + 1), 0);
  // Position `pos` takes each value in [0, remaining] in turn.
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == cur.size()) {
      cur[pos] = remaining;
      CompositionIndex c;
      c.s = cur;
      for (int v : cur) c.tau += v > 0 ? 1 : 0;
      out.push_back(std::move(c));
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, k);
  return out;
}

inline double BinomialCentral(int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(k + i) / static_cast<double>(i);
  return c;
}

// Q^{-s}: I - U U^T for s = 0, U Lambda^{-s} U^T for s >= 1.
inline SymmetricMatrix QPower(const SpikedModel& model, int s) {
  if (s < 0) throw DomainError("QPower: exponent must be >= 0");
  const Matrix& u = model.u().matrix();
  if (s == 0) {
    return SymmetricMatrix(Matrix::Identity(model.p(), model.p()) - u * u.transpose());
  }
  const Vector inv = model.spike_eigs().array().pow(-static_cast<double>(s)).matrix();
  return SymmetricMatrix(u * inv.asDiagonal() * u.transpose());
}

namespace oracle_internal {

inline void CheckDelta(const SpikedModel& model, const SymmetricMatrix& delta) {
  if (delta.dim() != model.p()) {
    throw DimensionError("spectral oracle: Delta is " + std::to_string(delta.dim()) +
                         "-dimensional, model has p=" + std::to_string(model.p()));
  }
}

inline Matrix STermWithPowers(const std::vector<Matrix>& q, const Matrix& delta, int k) {
  const Eigen::Index p = delta.rows();
  Matrix total = Matrix::Zero(p, p);
  for (const CompositionIndex& c : Compositions(k)) {
    Matrix prod = q[static_cast<std::size_t>(c.s[0])];
    for (std::size_t j = 1; j < c.s.size(); ++j) {
      prod = (prod * delta) * q[static_cast<std::size_t>(c.s[j])];
    }
    // (-1)^(1 + tau)
    if ((1 + c.tau) % 2 == 0) {
      total += prod;
    } else {
      total -= prod;
    }
  }
  return total;
}

inline std::vector<Matrix> PowersUpTo(const SpikedModel& model, int k) {
  std::vector<Matrix> q;
  q.reserve(static_cast<std::size_t>(k + 1));
  for (int s = 0; s <= k; ++s) q.push_back(QPower(model, s).matrix());
  return q;
}

}  // namespace oracle_internal

// k-th order term S_k(Delta).
inline SymmetricMatrix STerm(const SpikedModel& model, const SymmetricMatrix& delta, int k) {
  oracle_internal::CheckDelta(model, delta);
  if (k < 1 || k > kMaxExpansionOrder) {
    throw DomainError("STerm: order must lie in [1, " + std::to_string(kMaxExpansionOrder) + "]");
  }
  const auto q = oracle_internal::PowersUpTo(model, k);
  return SymmetricMatrix(oracle_internal::STermWithPowers(q, delta.matrix(), k));
}

struct ProjectorExpansion {
  SymmetricMatrix sum;     // sum_{k <= K} S_k(Delta)
  double tail_bound = 0;   // C(2K+2, K+1) x^{K+1} / (1 - 4x), x = ||Delta|| / lambda_r
  double delta_norm = 0;   // ||Delta|| (spectral)
};

// Geometric bound on sum_{k > K} C(2k, k) x^k; infinite when 4x >= 1.
inline double ExpansionTailBound(double x, int order) {
  if (x <= 0.0) return 0.0;
  if (4.0 * x >= 1.0) return std::numeric_limits<double>::infinity();
  return BinomialCentral(order + 1) * std::pow(x, order + 1) / (1.0 - 4.0 * x);
}

// Truncated expansion of U_hat U_hat^T - U U^T for the top-r eigenvectors of
// Sigma + Delta.
inline ProjectorExpansion ReconstructProjectorDiff(const SpikedModel& model,
                                                   const SymmetricMatrix& delta, int order = 6) {
  oracle_internal::CheckDelta(model, delta);
  if (order < 1 || order > kMaxExpansionOrder) {
    throw DomainError("ReconstructProjectorDiff: order must lie in [1, " +
                      std::to_string(kMaxExpansionOrder) + "]");
  }
  const double norm = SchattenNorm(delta, SchattenOrder::Infinity());
  const double lambda_r = model.lambda_min();
  if (2.0 * norm > lambda_r) {
    throw DomainError("ReconstructProjectorDiff: 2||Delta|| = " + std::to_string(2.0 * norm) +
                      " exceeds lambda_r = " + std::to_string(lambda_r));
  }
  const auto q = oracle_internal::PowersUpTo(model, order);
  Matrix total = Matrix::Zero(model.p(), model.p());
  for (int k = 1; k <= order; ++k) total += oracle_internal::STermWithPowers(q, delta.matrix(), k);
  return {SymmetricMatrix(total), ExpansionTailBound(norm / lambda_r, order), norm};
}

// 2 ||Lambda^-1 U^T Delta U_perp|| + 6 (4 + slack) ||Delta|| ||U^T Delta U_perp|| / (slack lambda_r^2),
// an upper bound on ||U_hat U_hat^T - U U^T|| whenever lambda_r >= (4 + slack) ||Delta||.
inline double FirstOrderSubspaceBound(const SpikedModel& model, const SymmetricMatrix& delta,
                                      double slack = 1.0) {
  oracle_internal::CheckDelta(model, delta);
  if (!(slack > 0.0)) throw DomainError("FirstOrderSubspaceBound: slack must be > 0");
  const double norm = SchattenNorm(delta, SchattenOrder::Infinity());
  const double lambda_r = model.lambda_min();
  if (lambda_r < (4.0 + slack) * norm) {
    throw DomainError("FirstOrderSubspaceBound: requires lambda_r >= (4 + slack) ||Delta||");
  }
  const Matrix& u = model.u().matrix();
  const Matrix perp = Matrix::Identity(model.p(), model.p()) - u * u.transpose();
  // ||A U_perp|| = ||A U_perp U_perp^T|| for any A.
  const Matrix cross = u.transpose() * delta.matrix() * perp;
  const Matrix scaled = model.spike_eigs().cwiseInverse().asDiagonal() * cross;
  return 2.0 * SpectralNorm(scaled) +
         6.0 * (4.0 + slack) * norm * SpectralNorm(cross) / (slack * lambda_r * lambda_r);
}

}  // namespace dpspectra

#endif  // DPSPECTRA_SPECTRAL_ORACLE_HPP_
