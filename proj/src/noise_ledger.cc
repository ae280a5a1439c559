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

#include "expiring_counter/noise_ledger.h"

#include <stdexcept>
#include <string>

namespace expiring_counter {

Fixed Fixed::FromDouble(double value) {
  const double scaled = std::ldexp(value, kFractionBits);
  if (!std::isfinite(scaled) || std::abs(scaled) >= 0x1.0p63) {
    throw std::overflow_error("value out of fixed-point range: " +
                              std::to_string(value));
  }
  return Fixed(static_cast<std::int64_t>(std::nearbyint(scaled)));
}

Fixed& Fixed::operator+=(Fixed other) {
  if (__builtin_add_overflow(ticks_, other.ticks_, &ticks_)) {
    throw std::overflow_error("fixed-point addition overflow");
  }
  return *this;
}

Fixed& Fixed::operator-=(Fixed other) {
  if (__builtin_sub_overflow(ticks_, other.ticks_, &ticks_)) {
    throw std::overflow_error("fixed-point subtraction overflow");
  }
  return *this;
}

std::optional<Fixed> NoiseLedger::Find(const NoiseKey& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

Fixed NoiseLedger::Materialize(const NoiseKey& key, LaplaceScale scale) {
  const auto [it, inserted] = values_.try_emplace(key);
  if (inserted) it->second = Fixed::FromDouble(KeyedNoise(key, scale));
  return it->second;
}

Fixed NoiseSource::Draw(const NoiseKey& key, LaplaceScale scale) const {
  if (zero_) return Fixed();
  if (ledger_ != nullptr) return ledger_->Materialize(key, scale);
  return Fixed::FromDouble(KeyedNoise(key, scale));
}

}  // namespace expiring_counter
