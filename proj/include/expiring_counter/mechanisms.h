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

#ifndef EXPIRING_COUNTER_MECHANISMS_H_
#define EXPIRING_COUNTER_MECHANISMS_H_

#include <cstdint>
#include <deque>
#include <vector>

#include "expiring_counter/dyadic.h"
#include "expiring_counter/noise.h"
#include "expiring_counter/noise_ledger.h"

namespace expiring_counter {

// Parameters of the delayed, level-budgeted counter.
struct MechanismParams {
  double epsilon = 1.0;
  // Level-budget exponent: level l noise has scale (1 + l)^(1 - lambda) / eps.
  double lambda = 1.0;
  // Number of initial steps that release 0.
  std::uint64_t delay = 0;

  // Throws std::invalid_argument on epsilon <= 0, lambda < 0 or non-finite.
  void Validate() const;
  LaplaceScale LevelScale(std::uint32_t level) const;
  // (1 + level)^(lambda - 1): privacy cost of shifting a level-l noise by 1,
  // in units of epsilon.
  double LevelWeight(std::uint32_t level) const;
};

// Parameters of the windowed baseline: a fresh binary mechanism per window of
// W steps plus a noisy prefix of all completed windows.
struct BaselineParams {
  std::uint64_t window = 1;
  double eps_cur = 1.0;
  double eps_past = 1.0;

  void Validate() const;
  // Number of tree levels needed for in-round prefixes of up to W items:
  // ceil(log2(W + 1)).
  std::uint32_t TreeDepth() const;
  LaplaceScale NodeScale() const;
  LaplaceScale PastScale() const;
};

// A single-owner state machine consuming one input in [0, 1] per step and
// releasing one estimate of the running count.
class ContinualCounter {
 public:
  virtual ~ContinualCounter() = default;
  // Throws std::invalid_argument when x is NaN or outside [0, 1].
  virtual double Step(double x) = 0;
  // Number of steps consumed so far.
  virtual std::uint64_t time() const = 0;
};

// Fresh Lap(1/eps) per release; release t is sum_{i<t} x_i + Z_{t-1} and the
// first release is 0. Releases therefore lag the input by one step.
class SimpleCounter final : public ContinualCounter {
 public:
  SimpleCounter(double epsilon, NoiseSource noise);

  double Step(double x) override;
  std::uint64_t time() const override { return t_; }

 private:
  LaplaceScale scale_;
  NoiseSource noise_;
  std::uint64_t t_ = 0;
  Fixed prefix_;
};

// Delayed counter with per-level noise budget.
//
// For t <= delay the release is 0. Afterwards, with u = t - delay, the release
// is sum_{i<=u} x_i plus one noise term for every dyadic interval containing
// u. Moving from u - 1 to u only replaces the noises on levels
// 0..countr_zero(u) (one of which is new when u is a power of two), so a step
// costs O(1) amortized draws and the live state is O(delay + log t).
class ExpirationCounter final : public ContinualCounter {
 public:
  ExpirationCounter(MechanismParams params, NoiseSource noise);

  double Step(double x) override;
  std::uint64_t time() const override { return t_; }

  const MechanismParams& params() const { return params_; }
  std::size_t active_noise_count() const { return active_.size(); }
  std::size_t peak_active_noise_count() const { return peak_active_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  std::size_t peak_buffer_size() const { return peak_buffer_; }
  std::uint64_t redraw_count() const { return redraws_; }

 private:
  MechanismParams params_;
  NoiseSource noise_;
  std::vector<LaplaceScale> level_scales_;
  std::uint64_t t_ = 0;
  Fixed prefix_;
  Fixed noise_sum_;
  std::vector<Fixed> active_;  // indexed by level
  std::deque<Fixed> buffer_;
  std::size_t peak_active_ = 0;
  std::size_t peak_buffer_ = 0;
  std::uint64_t redraws_ = 0;
};

// Every interval gets Lap(1/eps) and there is no delay. Same releases as an
// ExpirationCounter with lambda = 1, delay = 0.
class LogCounter final : public ContinualCounter {
 public:
  LogCounter(double epsilon, NoiseSource noise);

  double Step(double x) override { return inner_.Step(x); }
  std::uint64_t time() const override { return inner_.time(); }

 private:
  ExpirationCounter inner_;
};

// Windowed baseline. Round r covers steps (r-1)W+1 .. rW. Within a round a
// binary mechanism over in-round positions releases the in-round prefix with
// noise Lap(k/eps_cur) on each of the popcount(s) tree nodes covering [1, s].
// From round 2 on, a noisy copy c_r of the total of all earlier rounds, with
// one Lap(1/eps_past) per round, is added to every release of the round.
class BaselineCounter final : public ContinualCounter {
 public:
  BaselineCounter(BaselineParams params, NoiseSource noise);

  double Step(double x) override;
  std::uint64_t time() const override { return t_; }

 private:
  BaselineParams params_;
  NoiseSource noise_;
  LaplaceScale node_scale_;
  LaplaceScale past_scale_;
  std::uint64_t t_ = 0;
  Fixed past_prefix_;   // exact sum of completed rounds
  Fixed round_prefix_;  // exact sum inside the current round
  Fixed past_release_;  // c_r
};

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_MECHANISMS_H_
