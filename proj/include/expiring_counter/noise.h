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

#ifndef EXPIRING_COUNTER_NOISE_H_
#define EXPIRING_COUNTER_NOISE_H_

#include <compare>
#include <cstdint>
#include <span>

#include "expiring_counter/dyadic.h"

namespace expiring_counter {

// Scale b of a centered Laplace distribution, density exp(-|x|/b) / (2b).
class LaplaceScale {
 public:
  // Throws std::domain_error unless b > 0 and finite.
  explicit LaplaceScale(double b);

  double value() const { return b_; }
  double variance() const { return 2.0 * b_ * b_; }

 private:
  double b_;
};

// Which family of draws a key belongs to, so that e.g. the noise of interval
// (level 0, index 5) never coincides with the noise for step 5.
enum class NoiseDomain : std::uint8_t {
  kStep = 1,
  kInterval = 2,
  kRoundTree = 3,
  kRoundPast = 4,
};

// Identity of a single lazily drawn noise variable.
struct NoiseKey {
  std::uint64_t seed = 0;
  NoiseDomain domain = NoiseDomain::kInterval;
  std::uint32_t level = 0;
  std::uint64_t index = 0;
  std::uint64_t round = 0;

  static NoiseKey ForStep(std::uint64_t seed, std::uint64_t step) {
    return {seed, NoiseDomain::kStep, 0, step, 0};
  }
  static NoiseKey ForInterval(std::uint64_t seed, const DyadicInterval& iv) {
    return {seed, NoiseDomain::kInterval, iv.level, iv.index, 0};
  }
  static NoiseKey ForRoundNode(std::uint64_t seed, std::uint64_t round,
                               std::uint32_t level, std::uint64_t index) {
    return {seed, NoiseDomain::kRoundTree, level, index, round};
  }
  static NoiseKey ForRoundPast(std::uint64_t seed, std::uint64_t round) {
    return {seed, NoiseDomain::kRoundPast, 0, 0, round};
  }

  friend auto operator<=>(const NoiseKey&, const NoiseKey&) = default;
};

struct NoiseKeyHash {
  std::size_t operator()(const NoiseKey& key) const;
};

// Inverse-CDF transform of a uniform in (0, 1) into Lap(scale):
//   -b * sgn(u - 1/2) * ln(1 - 2|u - 1/2|).
// Throws std::domain_error when uniform is outside the open interval (0, 1).
double LaplaceSample(LaplaceScale scale, double uniform);

// Fixed pseudorandom function from keys to the open interval (0, 1). Uses a
// splitmix64 chain over the key fields and keeps the top 53 bits.
double KeyToUniform(const NoiseKey& key);

// LaplaceSample(scale, KeyToUniform(key)). Pure: the same key always gives
// the same value.
double KeyedNoise(const NoiseKey& key, LaplaceScale scale);

// exp(-t), an upper bound on Pr[|X| > t * b] for X ~ Lap(b). Throws
// std::domain_error for negative or NaN t.
double LaplaceTail(LaplaceScale scale, double t);

// High-probability bound on |Y_1 + ... + Y_k| for independent Y_i ~ Lap(b_i):
// returns nu * sqrt(8 ln(2 / beta)) with
//   nu = max(sqrt(sum b_i^2), b_max * sqrt(ln(2 / beta))).
// The sum exceeds this with probability at most beta. Natural log throughout.
// Throws std::domain_error if beta is not in (0, 1) or scales is empty.
double ConcentrationThreshold(std::span<const LaplaceScale> scales,
                              double beta);

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_NOISE_H_
