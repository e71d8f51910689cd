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

// Marchenko-Pastur law (zero-excluded) and the bulk-eigenvalue estimator of
// the noise level sigma^2.

#ifndef DPSPECTRA_MP_LAW_HPP_
#define DPSPECTRA_MP_LAW_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dpspectra/errors.hpp"
#include "dpspectra/matrix_core.hpp"

namespace dpspectra {

// Aspect ratio gamma = p / n and scale sigma^2.
class MpParams {
 public:
  explicit MpParams(double gamma, double sigma2 = 1.0) : gamma_(gamma), sigma2_(sigma2) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("MpParams: gamma must be positive");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("MpParams: sigma2 must be positive");
  }

  double gamma() const { return gamma_; }
  double sigma2() const { return sigma2_; }
  double lower_edge() const {
    const double t = 1.0 - std::sqrt(gamma_);
    return sigma2_ * t * t;
  }
  double upper_edge() const {
    const double t = 1.0 + std::sqrt(gamma_);
    return sigma2_ * t * t;
  }

 private:
  double gamma_;
  double sigma2_;
};

inline double MpPdf(double x, const MpParams& mp) {
  const double a = mp.lower_edge();
  const double b = mp.upper_edge();
  if (!(x > a && x < b) || x <= 0.0) return 0.0;
  const double norm = 2.0 * std::numbers::pi * mp.sigma2() * x * std::min(1.0, mp.gamma());
  return std::sqrt((x - a) * (b - x)) / norm;
}

namespace mp_internal {

// Density after x = a + (b - a) sin^2(theta); both square-root edge
// singularities cancel against the Jacobian, leaving a smooth integrand.
inline double ThetaIntegrand(double theta, const MpParams& mp) {
  const double a = mp.lower_edge();
  const double w = mp.upper_edge() - a;
  const double s = std::sin(theta);
  const double x = a + w * s * s;
  if (x <= 0.0) {
    // Only reachable at theta = 0 with gamma = 1; the limit is finite.
    return w / (std::numbers::pi * mp.sigma2() * std::min(1.0, mp.gamma()));
  }
  const double s2 = std::sin(2.0 * theta);
  return w * w * s2 * s2 / (4.0 * std::numbers::pi * mp.sigma2() * std::min(1.0, mp.gamma()) * x);
}

inline double ThetaOf(double x, const MpParams& mp) {
  const double a = mp.lower_edge();
  const double w = mp.upper_edge() - a;
  const double t = std::clamp((x - a) / w, 0.0, 1.0);
  return std::asin(std::sqrt(t));
}

inline double IntegrateTheta(double lo, double hi, const MpParams& mp) {
  if (hi <= lo) return 0.0;
  auto f = [&mp](double t) { return ThetaIntegrand(t, mp); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-14);
}

}  // namespace mp_internal

// Mass of the density on [lo, hi].
inline double MpMass(double lo, double hi, const MpParams& mp) {
  return mp_internal::IntegrateTheta(mp_internal::ThetaOf(lo, mp), mp_internal::ThetaOf(hi, mp), mp);
}

// Upper-tail mass of [q, upper_edge].
inline double MpUpperTail(double q, const MpParams& mp) {
  if (q <= mp.lower_edge()) return 1.0;
  if (q >= mp.upper_edge()) return 0.0;
  return mp_internal::IntegrateTheta(mp_internal::ThetaOf(q, mp), std::numbers::pi / 2.0, mp);
}

// q such that the mass above q equals prob. Bisection to an interval of
// width 1e-12 (relative to the support scale).
inline double MpUpperQuantile(double prob, const MpParams& mp) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw DomainError("MpUpperQuantile: prob " + std::to_string(prob) + " outside [0, 1]");
  }
  double lo = mp.lower_edge();
  double hi = mp.upper_edge();
  if (prob == 0.0) return hi;
  if (prob == 1.0) return lo;
  const double width = 1e-12 * std::max(1.0, hi);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (MpUpperTail(mid, mp) > prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct BulkQuantile {
  int k;
  double q;
};

// Index range [ceil(m/4), floor(3m/4)] with m = min(p, n).
inline std::pair<int, int> BulkIndexRange(long p, long n) {
  const long m = std::min(p, n);
  const int lo = static_cast<int>((m + 3) / 4);
  const int hi = static_cast<int>((3 * m) / 4);
  return {lo, hi};
}

// q_k, the k/min(p,n) upper quantile of MP(gamma = p/n, sigma^2 = 1), for
// every bulk index k.
inline std::vector<BulkQuantile> BulkQuantiles(long p, long n) {
  if (p < 8 || n < 8) {
    throw DomainError("BulkQuantiles: need p, n >= 8, got p=" + std::to_string(p) +
                      " n=" + std::to_string(n));
  }
  const auto [lo, hi] = BulkIndexRange(p, n);
  if (lo > hi) throw DomainError("BulkQuantiles: empty bulk index range");
  const MpParams mp(static_cast<double>(p) / static_cast<double>(n), 1.0);
  const double m = static_cast<double>(std::min(p, n));
  std::vector<BulkQuantile> out;
  out.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int k = lo; k <= hi; ++k) out.push_back({k, MpUpperQuantile(k / m, mp)});
  return out;
}

// sigma_hat^2 = sum_k q_k lambda_k / sum_k q_k^2 over the bulk range, with
// 1-based lambda_k taken from a non-increasing eigenvalue list.
inline double Sigma2HatFromQuantiles(const Vector& eigs, const std::vector<BulkQuantile>& qs) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [k, q] : qs) {
    if (k > eigs.size()) {
      throw DimensionError("Sigma2Hat: need " + std::to_string(k) + " eigenvalues, have " +
                           std::to_string(eigs.size()));
    }
    num += q * eigs(k - 1);
    den += q * q;
  }
  return num / den;
}

inline double Sigma2Hat(const Vector& eigs, long p, long n) {
  const auto [lo, hi] = BulkIndexRange(p, n);
  if (eigs.size() < hi) {
    throw DimensionError("Sigma2Hat: need " + std::to_string(hi) + " eigenvalues, have " +
                         std::to_string(eigs.size()));
  }
  return Sigma2HatFromQuantiles(eigs, BulkQuantiles(p, n));
}

}  // namespace dpspectra

#endif  // DPSPECTRA_MP_LAW_HPP_
