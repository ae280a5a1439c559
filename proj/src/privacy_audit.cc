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

#include "expiring_counter/privacy_audit.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expiring_counter {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// n = d - B + 1, the number of releases an input at j has influenced by
// time j + d. Caller guarantees d >= B.
std::uint64_t WindowLength(std::uint64_t d, const MechanismParams& params) {
  return d - params.delay + 1;
}

}  // namespace

PrivacyLossCurve PrivacyLossCurve::FromLosses(std::vector<double> loss) {
  PrivacyLossCurve curve;
  curve.envelope.resize(loss.size());
  double running = 0.0;
  for (std::size_t d = 0; d < loss.size(); ++d) {
    running = std::max(running, loss[d]);
    curve.envelope[d] = running;
  }
  curve.loss = std::move(loss);
  return curve;
}

double ExactGSum(std::uint64_t d, const MechanismParams& params) {
  if (d < params.delay) return 0.0;
  const std::uint32_t top = FloorLog2(WindowLength(d, params));
  double sum = 0.0;
  for (std::uint32_t level = 0; level <= top; ++level) {
    sum += params.LevelWeight(level);
  }
  return params.epsilon * 2.0 * sum;
}

double TheoreticalG(std::uint64_t d, const MechanismParams& params) {
  if (d < params.delay) return 0.0;
  const double x = std::log2(static_cast<double>(WindowLength(d, params))) + 1.0;
  double integral;
  if (params.lambda == 0.0) {
    integral = std::log(x);
  } else {
    integral = std::expm1(params.lambda * std::log(x)) / params.lambda;
  }
  return params.epsilon * 2.0 * (1.0 + integral);
}

double DominatingTheoreticalG(std::uint64_t d, const MechanismParams& params) {
  return std::max(TheoreticalG(d, params), ExactGSum(d, params));
}

double DecompositionCost(const Decomposition& intervals,
                         const MechanismParams& params, double y) {
  double sum = 0.0;
  for (const DyadicInterval& iv : intervals) {
    sum += params.LevelWeight(iv.level);
  }
  return std::abs(y) * params.epsilon * sum;
}

std::uint64_t PeriodicSearchBound(std::uint64_t d,
                                  const MechanismParams& params) {
  if (d < params.delay) return 1;
  return std::uint64_t{4} << FloorLog2(WindowLength(d, params));
}

double WorstPositionLossScan(std::uint64_t d, const MechanismParams& params,
                             std::uint64_t j_max) {
  if (d < params.delay) return 0.0;
  const std::uint64_t span = d - params.delay;
  double worst = 0.0;
  for (std::uint64_t j = 1; j <= j_max; ++j) {
    worst = std::max(worst, DecompositionCost(Decompose(j, j + span), params));
  }
  return worst;
}

double WorstPositionLossBySplit(std::uint64_t d,
                                const MechanismParams& params) {
  if (d < params.delay) return 0.0;
  const std::uint64_t n = WindowLength(d, params);
  // best[c]: largest weighted bit count of (a, b) restricted to the bits
  // processed so far, given carry c into the next bit of a + b = n.
  std::array<double, 2> best = {0.0, kNegInf};
  for (std::uint32_t level = 0; level <= FloorLog2(n); ++level) {
    const double w = params.LevelWeight(level);
    const unsigned bit = (n >> level) & 1U;
    std::array<double, 2> next = {kNegInf, kNegInf};
    for (unsigned carry = 0; carry < 2; ++carry) {
      if (best[carry] == kNegInf) continue;
      for (unsigned ones = 0; ones <= 2; ++ones) {
        const unsigned total = ones + carry;
        if ((total & 1U) != bit) continue;
        next[total >> 1] = std::max(next[total >> 1], best[carry] + w * ones);
      }
    }
    best = next;
  }
  return params.epsilon * best[0];
}

double EmpiricalLossExpiration(std::uint64_t d, const MechanismParams& params,
                         std::uint64_t t_max) {
  if (d < params.delay) return 0.0;
  const std::uint64_t bound = PeriodicSearchBound(d, params);
  if (t_max >= bound) return WorstPositionLossBySplit(d, params);
  return WorstPositionLossScan(d, params, t_max);
}

PrivacyLossCurve AuditExpirationCurve(const MechanismParams& params,
                                std::uint64_t d_max, std::uint64_t t_max) {
  params.Validate();
  std::vector<double> loss(d_max + 1);
  for (std::uint64_t d = 0; d <= d_max; ++d) {
    loss[d] = EmpiricalLossExpiration(d, params, t_max);
  }
  return PrivacyLossCurve::FromLosses(std::move(loss));
}

std::uint32_t BaselineSpentNodes(std::uint64_t s, std::uint64_t d,
                                 const BaselineParams& params) {
  const std::uint32_t depth = params.TreeDepth();
  const std::uint64_t offset = s - 1;
  const std::uint64_t latest = s + d;
  std::uint32_t spent = 0;
  for (std::uint32_t level = 0; level < depth; ++level) {
    const std::uint64_t index = offset >> level;
    if (index & 1U) continue;  // right children never enter a prefix
    const std::uint64_t end = (index + 1) << level;
    if (end <= params.window && end <= latest) ++spent;
  }
  return spent;
}

namespace {

double BaselineTreeLoss(std::uint32_t nodes, const BaselineParams& params) {
  return params.eps_cur / params.TreeDepth() * nodes;
}

std::uint64_t Positions(const BaselineParams& params, std::uint64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  return std::min(params.window, horizon);
}

}  // namespace

double EmpiricalLossBaseline(std::uint64_t d, const BaselineParams& params,
                             std::uint64_t horizon) {
  params.Validate();
  const std::uint64_t positions = Positions(params, horizon);
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= positions; ++s) {
    const std::uint64_t later_rounds = (s + d - 1) / params.window;
    const double loss =
        BaselineTreeLoss(BaselineSpentNodes(s, d, params), params) +
        params.eps_past * static_cast<double>(later_rounds);
    worst = std::max(worst, loss);
  }
  return worst;
}

PrivacyLossCurve AuditBaselineCurve(const BaselineParams& params,
                                    std::uint64_t d_max,
                                    std::uint64_t horizon) {
  params.Validate();
  const std::uint64_t w = params.window;
  const std::uint64_t positions = Positions(params, horizon);
  std::vector<double> loss(d_max + 1);

  const std::uint64_t direct_until = std::min(d_max + 1, w - 1);
  for (std::uint64_t d = 0; d < direct_until; ++d) {
    loss[d] = EmpiricalLossBaseline(d, params, horizon);
  }
  if (direct_until > d_max) return PrivacyLossCurve::FromLosses(std::move(loss));

  // Saturated tree part per position; prefix_max[i] covers s in [1, i],
  // suffix_max[i] covers s in [i, positions].
  std::vector<double> tree(positions + 2, kNegInf);
  for (std::uint64_t s = 1; s <= positions; ++s) {
    tree[s] = BaselineTreeLoss(BaselineSpentNodes(s, w, params), params);
  }
  std::vector<double> prefix_max(positions + 2, kNegInf);
  std::vector<double> suffix_max(positions + 2, kNegInf);
  for (std::uint64_t s = 1; s <= positions; ++s) {
    prefix_max[s] = std::max(prefix_max[s - 1], tree[s]);
  }
  for (std::uint64_t s = positions; s >= 1; --s) {
    suffix_max[s] = std::max(suffix_max[s + 1], tree[s]);
  }

  for (std::uint64_t d = direct_until; d <= d_max; ++d) {
    // floor((s + d - 1) / W) is q for s <= W - r and q + 1 above.
    const std::uint64_t q = d / w;
    const std::uint64_t r = d % w;
    const std::uint64_t low_end = std::min(positions, w - r);
    double worst = prefix_max[low_end] + params.eps_past * static_cast<double>(q);
    if (w - r + 1 <= positions) {
      worst = std::max(worst, suffix_max[w - r + 1] +
                                  params.eps_past * static_cast<double>(q + 1));
    }
    loss[d] = worst;
  }
  return PrivacyLossCurve::FromLosses(std::move(loss));
}

CouplingShiftResult CouplingShift(const NoiseLedger& ledger, std::uint64_t seed,
                                  std::uint64_t j, std::uint64_t tau_prime,
                                  double y, const MechanismParams& params) {
  params.Validate();
  if (!(std::abs(y) <= 1.0)) {
    throw std::domain_error("coupling shift requires |y| <= 1");
  }
  if (j < 1 || j > tau_prime) {
    throw std::domain_error("coupling shift requires 1 <= j <= tau'");
  }
  const Fixed shift = Fixed::FromDouble(y);
  CouplingShiftResult result{ledger, {}};
  result.report.y = shift.ToDouble();
  result.report.shifted_intervals = Decompose(j, tau_prime);
  for (const DyadicInterval& iv : result.report.shifted_intervals) {
    const NoiseKey key = NoiseKey::ForInterval(seed, iv);
    const Fixed z = result.ledger.Materialize(key, params.LevelScale(iv.level));
    result.ledger.Record(key, z + shift);
  }
  result.report.cost = DecompositionCost(result.report.shifted_intervals,
                                         params, result.report.y);
  return result;
}

namespace {

std::vector<double> RunRecorded(std::span<const double> stream,
                                std::uint64_t tau, const MechanismParams& params,
                                std::uint64_t seed, NoiseLedger& ledger) {
  ExpirationCounter counter(params, NoiseSource::Recorded(seed, &ledger));
  std::vector<double> out;
  out.reserve(tau);
  for (std::uint64_t t = 0; t < tau; ++t) out.push_back(counter.Step(stream[t]));
  return out;
}

}  // namespace

CouplingReport VerifyCoupling(std::span<const double> x,
                              std::span<const double> x_prime, std::uint64_t j,
                              std::uint64_t tau, const MechanismParams& params,
                              std::uint64_t seed) {
  params.Validate();
  if (j < 1 || tau < j || x.size() < tau || x_prime.size() < tau) {
    throw std::domain_error("VerifyCoupling requires 1 <= j <= tau <= length");
  }
  const std::size_t len = std::min(x.size(), x_prime.size());
  for (std::size_t i = 0; i < len; ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0 && x_prime[i] >= 0.0 &&
          x_prime[i] <= 1.0)) {
      throw std::domain_error("stream values must lie in [0, 1]");
    }
    if (i + 1 != j && x[i] != x_prime[i]) {
      throw std::domain_error("streams differ at position " +
                              std::to_string(i + 1) + ", not only at j");
    }
  }

  NoiseLedger ledger;
  const std::vector<double> original = RunRecorded(x, tau, params, seed, ledger);

  // The shift cancels the change in the quantized input exactly.
  const Fixed y = Fixed::FromDouble(x[j - 1]) - Fixed::FromDouble(x_prime[j - 1]);
  CouplingShiftResult shifted{ledger, {}};
  shifted.report.y = y.ToDouble();
  if (tau > params.delay && tau - params.delay >= j) {
    shifted = CouplingShift(ledger, seed, j, tau - params.delay, y.ToDouble(),
                            params);
  }
  const std::vector<double> coupled =
      RunRecorded(x_prime, tau, params, seed, shifted.ledger);

  CouplingReport report = std::move(shifted.report);
  report.outputs_identical = std::equal(
      original.begin(), original.end(), coupled.begin(), coupled.end(),
      [](double a, double b) {
        return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
      });
  return report;
}

LowerBoundReport LowerBoundCheck(std::uint64_t horizon, std::uint64_t max_error,
                                 double epsilon, const PrivacyLossCurve& curve,
                                 LogBase base) {
  if (max_error == 0 || 2 * max_error >= horizon) {
    throw std::domain_error("lower bound requires 0 < C < T / 2");
  }
  if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  if (curve.envelope.size() < 2 * max_error) {
    throw std::invalid_argument("curve must cover d = 0 .. 2C - 1");
  }
  const double ratio = static_cast<double>(horizon) / (6.0 * max_error);
  const double log_ratio =
      base == LogBase::kNatural ? std::log(ratio) : std::log2(ratio);

  LowerBoundReport report;
  for (std::uint64_t d = 0; d < 2 * max_error; ++d) {
    report.sum_g += curve.envelope[d] / epsilon;
  }
  report.required_sum = log_ratio / epsilon;
  report.holds = report.sum_g >= report.required_sum;

  report.single_point = 2.0 * max_error *
                        (curve.envelope[2 * max_error - 1] / epsilon);
  report.required_single_point = log_ratio / (2.0 * epsilon);
  report.single_point_holds =
      report.single_point >= report.required_single_point;
  return report;
}

}  // namespace expiring_counter
