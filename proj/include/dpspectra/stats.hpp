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

#ifndef DPSPECTRA_STATS_HPP_
#define DPSPECTRA_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dpspectra/errors.hpp"

namespace dpspectra {

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7, the R and NumPy default).
inline double QuantileType7(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("QuantileType7: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("QuantileType7: prob outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double Mean(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("Mean: empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator); 0 for a single value.
inline double SampleSd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Unbiased sample variance.
inline double SampleVariance(const std::vector<double>& v) {
  const double sd = SampleSd(v);
  return sd * sd;
}

// Least-squares slope of y on x.
inline double FitSlope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("FitSlope: need >= 2 paired points");
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

// Slope of log(y) against log(x).
inline double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  return FitSlope(lx, ly);
}

}  // namespace dpspectra

#endif  // DPSPECTRA_STATS_HPP_
