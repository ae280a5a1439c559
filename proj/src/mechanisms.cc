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

#include "expiring_counter/mechanisms.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expiring_counter {
namespace {

Fixed CheckedInput(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("stream value must lie in [0, 1], got " +
                                std::to_string(x));
  }
  return Fixed::FromDouble(x);
}

void RequirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) +
                                " must be positive and finite");
  }
}

}  // namespace

void MechanismParams::Validate() const {
  RequirePositive(epsilon, "epsilon");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be non-negative and finite");
  }
}

LaplaceScale MechanismParams::LevelScale(std::uint32_t level) const {
  return LaplaceScale(std::pow(1.0 + level, 1.0 - lambda) / epsilon);
}

double MechanismParams::LevelWeight(std::uint32_t level) const {
  return std::pow(1.0 + level, lambda - 1.0);
}

void BaselineParams::Validate() const {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  RequirePositive(eps_cur, "eps_cur");
  RequirePositive(eps_past, "eps_past");
}

std::uint32_t BaselineParams::TreeDepth() const {
  return static_cast<std::uint32_t>(std::bit_width(window));
}

LaplaceScale BaselineParams::NodeScale() const {
  return LaplaceScale(TreeDepth() / eps_cur);
}

LaplaceScale BaselineParams::PastScale() const {
  return LaplaceScale(1.0 / eps_past);
}

SimpleCounter::SimpleCounter(double epsilon, NoiseSource noise)
    : scale_((RequirePositive(epsilon, "epsilon"), 1.0 / epsilon)), noise_(noise) {}

double SimpleCounter::Step(double x) {
  const Fixed value = CheckedInput(x);
  ++t_;
  Fixed release;
  if (t_ >= 2) {
    release = prefix_ + noise_.Draw(NoiseKey::ForStep(noise_.seed(), t_ - 1),
                                    scale_);
  }
  prefix_ += value;
  return release.ToDouble();
}

ExpirationCounter::ExpirationCounter(MechanismParams params, NoiseSource noise)
    : params_(params), noise_(noise) {
  params_.Validate();
}

double ExpirationCounter::Step(double x) {
  const Fixed value = CheckedInput(x);
  ++t_;
  buffer_.push_back(value);
  if (buffer_.size() > params_.delay) {
    prefix_ += buffer_.front();
    buffer_.pop_front();
  }
  peak_buffer_ = std::max(peak_buffer_, buffer_.size());
  if (t_ <= params_.delay) return 0.0;

  const std::uint64_t u = t_ - params_.delay;
  const auto changed_top = static_cast<std::uint32_t>(std::countr_zero(u));
  for (std::uint32_t level = 0; level <= changed_top; ++level) {
    if (level == level_scales_.size()) {
      level_scales_.push_back(params_.LevelScale(level));
    }
    const Fixed z = noise_.Draw(
        NoiseKey::ForInterval(noise_.seed(), DyadicInterval{level, u >> level}),
        level_scales_[level]);
    if (level < active_.size()) {
      noise_sum_ -= active_[level];
      active_[level] = z;
    } else {
      active_.push_back(z);
    }
    noise_sum_ += z;
    ++redraws_;
  }
  peak_active_ = std::max(peak_active_, active_.size());
  return (prefix_ + noise_sum_).ToDouble();
}

LogCounter::LogCounter(double epsilon, NoiseSource noise)
    : inner_(MechanismParams{epsilon, 1.0, 0}, noise) {}

BaselineCounter::BaselineCounter(BaselineParams params, NoiseSource noise)
    : params_((params.Validate(), params)),
      noise_(noise),
      node_scale_(params.NodeScale()),
      past_scale_(params.PastScale()) {}

double BaselineCounter::Step(double x) {
  const Fixed value = CheckedInput(x);
  ++t_;
  const std::uint64_t round = (t_ - 1) / params_.window + 1;
  const std::uint64_t pos = t_ - (round - 1) * params_.window;
  if (pos == 1 && round > 1) {
    past_prefix_ += round_prefix_;
    round_prefix_ = Fixed();
    past_release_ =
        past_prefix_ +
        noise_.Draw(NoiseKey::ForRoundPast(noise_.seed(), round), past_scale_);
  }
  round_prefix_ += value;

  // [1, pos] split along the binary representation of pos; node (level,
  // index) covers in-round positions index*2^level + 1 .. (index+1)*2^level.
  Fixed tree_noise;
  std::uint64_t covered = 0;
  for (std::uint64_t rest = pos; rest != 0;) {
    const std::uint32_t level = FloorLog2(rest);
    tree_noise += noise_.Draw(
        NoiseKey::ForRoundNode(noise_.seed(), round, level, covered >> level),
        node_scale_);
    covered += std::uint64_t{1} << level;
    rest &= ~(std::uint64_t{1} << level);
  }
  return (past_release_ + round_prefix_ + tree_noise).ToDouble();
}

}  // namespace expiring_counter
