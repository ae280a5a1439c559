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

#ifndef EXPIRING_COUNTER_PRIVACY_AUDIT_H_
#define EXPIRING_COUNTER_PRIVACY_AUDIT_H_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "expiring_counter/dyadic.h"
#include "expiring_counter/mechanisms.h"
#include "expiring_counter/noise_ledger.h"

namespace expiring_counter {

inline constexpr std::uint64_t kUnboundedHorizon =
    std::numeric_limits<std::uint64_t>::max();

// Privacy loss (epsilon * g(d)) of an input observed d steps ago, d = 0, 1, ...
// together with its running maximum. The envelope is the non-decreasing
// expiration function actually certified by a curve.
struct PrivacyLossCurve {
  std::vector<double> loss;
  std::vector<double> envelope;

  static PrivacyLossCurve FromLosses(std::vector<double> loss);
  std::size_t size() const { return loss.size(); }
};

// epsilon * 2 * sum_{l=0}^{floor(log2(d - B + 1))} (1 + l)^(lambda - 1), the
// bound obtained from two intervals per level; 0 for d < B.
double ExactGSum(std::uint64_t d, const MechanismParams& params);

// Closed-form (integral) relaxation of ExactGSum, times epsilon. With
// n = d - B + 1:
//   lambda > 0:  2 * (1 + ((log2(n) + 1)^lambda - 1) / lambda)
//   lambda = 0:  2 * (1 + ln(log2(n) + 1)), the lambda -> 0 limit.
// Returns 0 for d < B. For lambda > 1 the integral undershoots the sum at
// some d, so use DominatingTheoreticalG when a certified bound is needed.
double TheoreticalG(std::uint64_t d, const MechanismParams& params);

// max(TheoreticalG, ExactGSum): the theoretical curve that is reported.
double DominatingTheoreticalG(std::uint64_t d, const MechanismParams& params);

// |y| * sum over intervals of 1 / b_I = |y| * eps * sum (1 + l_I)^(lambda - 1).
double DecompositionCost(const Decomposition& intervals,
                         const MechanismParams& params, double y = 1.0);

// Positions j in [1, J] with J = 4 * 2^floor(log2(d - B + 1)) cover every
// translation class of a window of d - B + 1 steps.
std::uint64_t PeriodicSearchBound(std::uint64_t d, const MechanismParams& params);

// max over j in [1, j_max] of DecompositionCost(Decompose(j, j + d - B)).
double WorstPositionLossScan(std::uint64_t d, const MechanismParams& params,
                             std::uint64_t j_max);

// The same maximum over all positions, computed without scanning. A window
// of length n splits into a left part of length a and a right part of length
// n - a, each covered by one interval per set bit, and every split
// 0 <= a < n occurs at some position. The maximum of the weighted bit counts
// of a and n - a is found by a carry DP over the bits of n.
double WorstPositionLossBySplit(std::uint64_t d, const MechanismParams& params);

// Worst-case loss of the delayed counter for elapsed time d over positions
// j <= t_max: 0 for d < B, otherwise the maximum over
// j in [1, min(t_max, J)] of the exact decomposition cost.
double EmpiricalLossExpiration(std::uint64_t d, const MechanismParams& params,
                         std::uint64_t t_max = kUnboundedHorizon);

PrivacyLossCurve AuditExpirationCurve(const MechanismParams& params,
                                std::uint64_t d_max,
                                std::uint64_t t_max = kUnboundedHorizon);

// Worst-case loss of the windowed baseline for an input at stream position
// t <= horizon, observed d steps later. With s the in-round position of t:
//  - tree part: eps_cur / k per tree node containing s that enters some
//    in-round release no later than t + d. Only nodes that appear in a
//    prefix decomposition count: their end e satisfies e <= W and e / 2^l is
//    odd, and they first appear at in-round time e.
//  - past part: eps_past per later round whose c_r (released from the
//    round's first step on) is released no later than t + d.
double EmpiricalLossBaseline(std::uint64_t d, const BaselineParams& params,
                             std::uint64_t horizon = kUnboundedHorizon);

// Number of tree nodes containing in-round position s that enter some
// release by in-round time s + d (the tree part above, in node units).
std::uint32_t BaselineSpentNodes(std::uint64_t s, std::uint64_t d,
                                 const BaselineParams& params);

// Curve of EmpiricalLossBaseline for d = 0..d_max. Once d >= W - 1 the tree
// part no longer depends on d, and each d is then answered in O(1) from
// prefix and suffix maxima over positions.
PrivacyLossCurve AuditBaselineCurve(const BaselineParams& params,
                                    std::uint64_t d_max,
                                    std::uint64_t horizon = kUnboundedHorizon);

struct CouplingReport {
  // Only set by VerifyCoupling.
  bool outputs_identical = false;
  double cost = 0.0;
  Decomposition shifted_intervals;
  double y = 0.0;
};

struct CouplingShiftResult {
  NoiseLedger ledger;
  CouplingReport report;
};

// Returns a copy of `ledger` in which z_I is replaced by z_I + y for every I
// in Decompose(j, tau_prime), everything else untouched. Entries missing from
// the ledger are materialized from the keyed noise of `seed` first. y is
// rounded to the fixed-point grid, so shifting by -y undoes the shift
// exactly. Throws std::domain_error if |y| > 1 or not 1 <= j <= tau_prime.
CouplingShiftResult CouplingShift(const NoiseLedger& ledger, std::uint64_t seed,
                                  std::uint64_t j, std::uint64_t tau_prime,
                                  double y, const MechanismParams& params);

// Runs the delayed counter on x with fresh seeded noise, shifts the recorded
// noise on the decomposition of [j, tau - B] by y = x_j - x'_j, reruns on
// x_prime with the shifted ledger and compares releases 1..tau bit for bit.
// No shift is needed when tau - B < j. j and tau are 1-based.
// Throws std::domain_error unless the streams have length >= tau, take values
// in [0, 1] and differ at most at position j.
CouplingReport VerifyCoupling(std::span<const double> x,
                              std::span<const double> x_prime, std::uint64_t j,
                              std::uint64_t tau, const MechanismParams& params,
                              std::uint64_t seed);

enum class LogBase { kNatural, kBinary };

struct LowerBoundReport {
  bool holds = false;
  // sum_{j=0}^{2C-1} g(j) against log(T / (6C)) / epsilon.
  double sum_g = 0.0;
  double required_sum = 0.0;
  // 2C * g(2C - 1) against log(T / (6C)) / (2 epsilon).
  bool single_point_holds = false;
  double single_point = 0.0;
  double required_single_point = 0.0;
};

// Checks a loss curve against the packing lower bound for a counter with
// maximum additive error C over T steps. g(j) is read from the curve's
// envelope divided by epsilon. Throws std::domain_error unless 0 < C < T/2,
// and std::invalid_argument if the curve has fewer than 2C entries.
LowerBoundReport LowerBoundCheck(std::uint64_t horizon, std::uint64_t max_error,
                                 double epsilon, const PrivacyLossCurve& curve,
                                 LogBase base = LogBase::kNatural);

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_PRIVACY_AUDIT_H_
