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

#ifndef DPSPECTRA_RANDOM_HPP_
#define DPSPECTRA_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace dpspectra {

// Caller-owned random stream. Every randomized routine takes one by
// reference; nothing in the library touches global random state.
using Rng = std::mt19937_64;

namespace rng_internal {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t Mix(std::uint64_t acc, std::uint64_t v) {
  return SplitMix64(acc ^ SplitMix64(v));
}

inline std::uint64_t Mix(std::uint64_t acc, std::string_view v) {
  return Mix(acc, Fnv1a(v));
}

}  // namespace rng_internal

// Derives an independent stream seed from a base seed and any sequence of
// integer or string keys. Pure function of its arguments, so derived streams
// are reproducible regardless of execution order.
template <typename... Keys>
std::uint64_t DeriveSeed(std::uint64_t base, const Keys&... keys) {
  std::uint64_t acc = rng_internal::SplitMix64(base);
  ((acc = rng_internal::Mix(acc, keys)), ...);
  return acc;
}

inline double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace dpspectra

#endif  // DPSPECTRA_RANDOM_HPP_
