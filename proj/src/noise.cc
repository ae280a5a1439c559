//
// Copyright 2026 The Expiring Counter Authors
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

#include "expiring_counter/noise.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expiring_counter {
namespace {

std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t HashKey(const NoiseKey& key) {
  std::uint64_t h = SplitMix64(key.seed);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(key.domain));
  h = SplitMix64(h ^ key.level);
  h = SplitMix64(h ^ key.index);
  h = SplitMix64(h ^ key.round);
  return h;
}

}  // namespace

LaplaceScale::LaplaceScale(double b) : b_(b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw std::domain_error("Laplace scale must be positive and finite, got " +
                            std::to_string(b));
  }
}

std::size_t NoiseKeyHash::operator()(const NoiseKey& key) const {
  return static_cast<std::size_t>(HashKey(key));
}

double LaplaceSample(LaplaceScale scale, double uniform) {
  if (!(uniform > 0.0 && uniform < 1.0)) {
    throw std::domain_error("uniform input must lie in (0, 1), got " +
                            std::to_string(uniform));
  }
  const double centered = uniform - 0.5;
  if (centered == 0.0) return 0.0;
  const double sign = centered > 0.0 ? 1.0 : -1.0;
  return -scale.value() * sign * std::log1p(-2.0 * std::abs(centered));
}

double KeyToUniform(const NoiseKey& key) {
  // (m + 1/2) / 2^53 for a 53-bit m is never 0 or 1.
  const std::uint64_t mantissa = HashKey(key) >> 11;
  return (static_cast<double>(mantissa) + 0.5) * 0x1.0p-53;
}

double KeyedNoise(const NoiseKey& key, LaplaceScale scale) {
  return LaplaceSample(scale, KeyToUniform(key));
}

double LaplaceTail(LaplaceScale /*scale*/, double t) {
  if (!(t >= 0.0)) {
    throw std::domain_error("tail parameter must be non-negative");
  }
  return std::exp(-t);
}

double ConcentrationThreshold(std::span<const LaplaceScale> scales,
                              double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::domain_error("beta must lie in (0, 1), got " +
                            std::to_string(beta));
  }
  if (scales.empty()) {
    throw std::domain_error("ConcentrationThreshold needs at least one scale");
  }
  double sum_sq = 0.0;
  double b_max = 0.0;
  for (const LaplaceScale& s : scales) {
    sum_sq += s.value() * s.value();
    b_max = std::max(b_max, s.value());
  }
  const double log_term = std::log(2.0 / beta);
  const double nu = std::max(std::sqrt(sum_sq), b_max * std::sqrt(log_term));
  return nu * std::sqrt(8.0 * log_term);
}

}  // namespace expiring_counter
