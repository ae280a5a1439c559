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

#ifndef EXPIRING_COUNTER_NOISE_LEDGER_H_
#define EXPIRING_COUNTER_NOISE_LEDGER_H_

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "expiring_counter/noise.h"

namespace expiring_counter {

// Signed Q31.32 fixed-point value. Mechanisms accumulate inputs and noise in
// this representation so that a release depends only on the multiset of
// terms, never on the order of additions. That is what lets two runs whose
// noise differs by an exact shift produce bit-identical outputs.
class Fixed {
 public:
  static constexpr int kFractionBits = 32;
  static constexpr double kResolution = 0x1.0p-32;

  constexpr Fixed() = default;
  static constexpr Fixed FromTicks(std::int64_t ticks) { return Fixed(ticks); }
  // Rounds to the nearest representable value. Throws std::overflow_error
  // if |value| >= 2^31 or value is not finite.
  static Fixed FromDouble(double value);

  constexpr std::int64_t ticks() const { return ticks_; }
  double ToDouble() const { return std::ldexp(static_cast<double>(ticks_), -kFractionBits); }

  // Overflow-checked; throws std::overflow_error.
  Fixed& operator+=(Fixed other);
  Fixed& operator-=(Fixed other);
  friend Fixed operator+(Fixed a, Fixed b) { return a += b; }
  friend Fixed operator-(Fixed a, Fixed b) { return a -= b; }
  friend constexpr auto operator<=>(Fixed, Fixed) = default;

 private:
  constexpr explicit Fixed(std::int64_t ticks) : ticks_(ticks) {}
  std::int64_t ticks_ = 0;
};

// Record of every noise value a run referenced, keyed by NoiseKey. Values are
// stored in fixed point, so shifting and unshifting entries is exact.
class NoiseLedger {
 public:
  using Map = std::unordered_map<NoiseKey, Fixed, NoiseKeyHash>;

  std::optional<Fixed> Find(const NoiseKey& key) const;
  void Record(const NoiseKey& key, Fixed value) { values_[key] = value; }
  // Existing entry, or the quantized KeyedNoise value (recorded first).
  Fixed Materialize(const NoiseKey& key, LaplaceScale scale);

  std::size_t size() const { return values_.size(); }
  const Map& entries() const { return values_; }

  friend bool operator==(const NoiseLedger&, const NoiseLedger&) = default;

 private:
  Map values_;
};

// Where a mechanism gets its noise from.
//  - Keyed: quantized KeyedNoise, nothing stored.
//  - Zero: every draw is exactly 0 (for testing release logic).
//  - Recorded: reads through a caller-owned ledger. Present keys are replayed
//    verbatim, absent keys are drawn as in Keyed mode and recorded. The
//    ledger must outlive the source.
class NoiseSource {
 public:
  static NoiseSource Keyed(std::uint64_t seed) { return NoiseSource(seed, false, nullptr); }
  static NoiseSource Zero() { return NoiseSource(0, true, nullptr); }
  static NoiseSource Recorded(std::uint64_t seed, NoiseLedger* ledger) {
    return NoiseSource(seed, false, ledger);
  }

  std::uint64_t seed() const { return seed_; }
  Fixed Draw(const NoiseKey& key, LaplaceScale scale) const;

 private:
  NoiseSource(std::uint64_t seed, bool zero, NoiseLedger* ledger)
      : seed_(seed), zero_(zero), ledger_(ledger) {}

  std::uint64_t seed_;
  bool zero_;
  NoiseLedger* ledger_;
};

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_NOISE_LEDGER_H_
