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

#include "expiring_counter/calibration.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "expiring_counter/dyadic.h"
#include "expiring_counter/noise.h"
#include "gtest/gtest.h"

namespace expiring_counter {
namespace {

// Per-release variance summed directly from the containing-interval scales.
double BruteMseExpiration(const MechanismParams& p, std::uint64_t horizon) {
  double total = 0.0;
  for (std::uint64_t t = p.delay + 1; t <= horizon; ++t) {
    const std::uint64_t u = t - p.delay;
    for (std::uint32_t l = 0; (std::uint64_t{1} << l) <= u; ++l) {
      const double b = std::pow(1.0 + l, 1.0 - p.lambda) / p.epsilon;
      total += 2.0 * b * b;
    }
  }
  return total / static_cast<double>(horizon);
}

double BruteMseBaseline(const BaselineParams& p, std::uint64_t horizon) {
  const double k = std::bit_width(p.window);
  double total = 0.0;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const std::uint64_t s = (t - 1) % p.window + 1;
    total += std::popcount(s) * 2.0 * (k / p.eps_cur) * (k / p.eps_cur);
    if (t > p.window) total += 2.0 / (p.eps_past * p.eps_past);
  }
  return total / static_cast<double>(horizon);
}

TEST(AnalyticMseTest, UnitLambdaReferenceValue) {
  // sum_{t=1}^{1000} (floor(log2 t) + 1) = 8987.
  EXPECT_NEAR(AnalyticMseExpiration({1.0, 1.0, 0}, 1000), 2.0 * 8987 / 1000, 1e-12);
}

TEST(AnalyticMseTest, MatchesBruteForce) {
  for (double lambda : {0.0, 0.7, 1.0, 2.0, 3.0}) {
    for (std::uint64_t delay : {0u, 10u}) {
      for (std::uint64_t horizon : {1u, 7u, 1000u, 4097u}) {
        const MechanismParams p{0.8, lambda, delay};
        const double expected = BruteMseExpiration(p, horizon);
        EXPECT_NEAR(AnalyticMseExpiration(p, horizon), expected, 1e-12 * (1 + expected));
      }
    }
  }
  for (std::uint64_t w : {1u, 31u, 64u}) {
    for (std::uint64_t horizon : {5u, 1000u}) {
      const BaselineParams p{w, 0.7, 0.2};
      const double expected = BruteMseBaseline(p, horizon);
      EXPECT_NEAR(AnalyticMseBaseline(p, horizon), expected, 1e-9 * expected);
    }
  }
}

TEST(AnalyticMseTest, SmallAndPartialBaselSums) {
  EXPECT_DOUBLE_EQ(AnalyticMseExpiration({1.0, 1.0, 0}, 1), 2.0);
  // Most releases see about ten levels, sum (1 + l)^-2 ~ 1.52 to 1.55.
  const double mse = AnalyticMseExpiration({1.0, 2.0, 0}, 1000);
  EXPECT_GT(mse, 2.0 * 1.45);
  EXPECT_LT(mse, 2.0 * 1.55);
}

TEST(AnalyticMseTest, BaselineReferenceValue) {
  EXPECT_NEAR(AnalyticMseBaseline({31, 1.0, 0.1}, 1000), 322.45, 0.005);
}

TEST(AnalyticMseTest, BaselineWithoutRefreshIsBinaryMechanism) {
  const double k = 7;  // W = 100
  double popcounts = 0;
  for (unsigned s = 1; s <= 80; ++s) popcounts += std::popcount(s);
  EXPECT_NEAR(AnalyticMseBaseline({100, 0.5, 1e-9}, 80),
              2.0 * k * k * popcounts / 0.25 / 80.0, 1e-9);
}

TEST(AnalyticMseTest, ScalesInverselyWithEpsilonSquared) {
  const double base = AnalyticMseBaseline({63, 0.4, 0.04}, 5000);
  EXPECT_NEAR(AnalyticMseBaseline({63, 0.8, 0.08}, 5000), base / 4.0, 1e-9 * base);
  const double expiring = AnalyticMseExpiration({0.4, 1.5, 3}, 5000);
  EXPECT_NEAR(AnalyticMseExpiration({1.2, 1.5, 3}, 5000), expiring / 9.0, 1e-9 * expiring);
}

TEST(NoiseVarianceTest, Values) {
  const MechanismParams p{0.5, 2.0, 3};
  EXPECT_EQ(NoiseVarianceExpiration(3, p), 0.0);
  EXPECT_DOUBLE_EQ(NoiseVarianceExpiration(4, p), 2.0 * 1.0 / 0.25);
  EXPECT_DOUBLE_EQ(NoiseVarianceExpiration(7, p), 2.0 * (1.0 + 0.25 + 1.0 / 9.0) / 0.25);
}

TEST(CalibrateEpsilonTest, HitsTarget) {
  for (double lambda : {0.0, 1.0, 2.5}) {
    const ExpirationCalibration cal = CalibrateEpsilon(250.0, 5000, lambda, 7);
    EXPECT_NEAR(cal.achieved_mse, 250.0, 1e-9);
    EXPECT_EQ(cal.params.delay, 7u);
    EXPECT_EQ(cal.horizon, 5000u);
  }
  EXPECT_THROW(CalibrateEpsilon(0.0, 10, 1.0), std::domain_error);
  EXPECT_THROW(CalibrateEpsilon(1.0, 0, 1.0), std::domain_error);
  EXPECT_THROW(CalibrateEpsilon(1.0, 5, 1.0, 5), std::domain_error);
}

TEST(CalibrateBaselineTest, HitsTargetWithRatio) {
  const BaselineCalibration cal = CalibrateBaseline(1000.0, 1000, 63, 0.1);
  EXPECT_NEAR(cal.achieved_mse, 1000.0, 1e-9);
  EXPECT_DOUBLE_EQ(cal.params.eps_past, 0.1 * cal.params.eps_cur);
  EXPECT_THROW(CalibrateBaseline(1000.0, 1000, 63, 0.0), std::domain_error);
}

TEST(OptimalRatioTest, IsALocalMinimum) {
  const OptimalRatioResult opt = OptimalRatio(1000.0, 1000, 63);
  EXPECT_NEAR(opt.calibration.achieved_mse, 1000.0, 1e-9);
  const double later_rounds = std::ceil(1000.0 / 63) - 1;
  for (double factor : {0.97, 1.03}) {
    const BaselineCalibration other =
        CalibrateBaseline(1000.0, 1000, 63, opt.ratio * factor);
    EXPECT_GT(other.params.eps_cur + other.params.eps_past * later_rounds,
              opt.objective);
  }
}

TEST(OptimalRatioTest, ClosedFormAgreement) {
  // Objective eps_cur (1 + r (N - 1)) with eps_cur^2 = A + P / r^2 (per unit
  // MSE) is minimized at r = (P / (A (N - 1)))^(1/3).
  const std::uint64_t w = 127;
  const std::uint64_t horizon = 1000000;
  const double tree = AnalyticMseBaseline({w, 1.0, 1e300}, horizon);
  const double past = AnalyticMseBaseline({w, 1e150, 1.0}, horizon);
  const double n = std::ceil(static_cast<double>(horizon) / w);
  const double expected = std::cbrt(past / (tree * (n - 1)));
  EXPECT_NEAR(OptimalRatio(1000.0, horizon, w).ratio, expected, 1e-6 * expected);
}

TEST(OptimalRatioTest, SingleRefreshAgainstGrid) {
  // T = 100, W = 60: N = 2 and the objective is eps_cur + eps_past.
  const OptimalRatioResult opt = OptimalRatio(1000.0, 100, 60);
  double best = 1e300;
  double best_ratio = 0.0;
  for (double log_r = std::log(1e-4); log_r <= 0.0; log_r += 1e-4) {
    const BaselineParams p = CalibrateBaseline(1000.0, 100, 60, std::exp(log_r)).params;
    if (p.eps_cur + p.eps_past < best) {
      best = p.eps_cur + p.eps_past;
      best_ratio = std::exp(log_r);
    }
  }
  EXPECT_LE(opt.objective, best * (1.0 + 1e-9));
  EXPECT_NEAR(opt.ratio, best_ratio, 1e-3 * best_ratio);
}

TEST(OptimalRatioTest, RequiresMoreThanOneRound) {
  EXPECT_THROW(OptimalRatio(1000.0, 100, 100), std::domain_error);
}

TEST(ErrorBoundTest, Formula) {
  const MechanismParams p{0.5, 2.0, 4};
  const double beta = 0.01;
  const std::uint64_t t = 4 + 12;  // levels 0..3
  std::vector<LaplaceScale> scales;
  for (int l = 0; l <= 3; ++l) scales.emplace_back(std::pow(1.0 + l, -1.0) / 0.5);
  EXPECT_DOUBLE_EQ(ErrorBoundExpiration(t, beta, p),
                   4.0 + ConcentrationThreshold(scales, beta));
  EXPECT_THROW(ErrorBoundExpiration(4, beta, p), std::domain_error);
  EXPECT_THROW(ErrorBoundExpiration(10, 0.0, p), std::domain_error);
}

TEST(ErrorBoundTest, DelayIsAdditiveAndLambdaShrinks) {
  const double base = ErrorBoundExpiration(500, 0.05, {1.0, 1.0, 0});
  EXPECT_DOUBLE_EQ(ErrorBoundExpiration(510, 0.05, {1.0, 1.0, 10}) - base, 10.0);
  EXPECT_LT(ErrorBoundExpiration(500, 0.05, {1.0, 2.0, 0}), base);
  // Once the level-0 term b_max sqrt(ln(2/beta)) dominates nu, larger lambda
  // no longer changes the bound.
  EXPECT_LE(ErrorBoundExpiration(500, 0.05, {1.0, 3.0, 0}),
            ErrorBoundExpiration(500, 0.05, {1.0, 2.0, 0}));
}

TEST(ErrorBoundTest, DominatesSimulatedQuantile) {
  // |error| at t = 1024 is the sum of the 11 containing-interval draws.
  const MechanismParams p{1.0, 1.0, 0};
  constexpr int kTrials = 100000;
  std::vector<double> errors(kTrials);
  for (int seed = 0; seed < kTrials; ++seed) {
    double z = 0.0;
    for (const DyadicInterval& iv : Intersect(1024)) {
      z += KeyedNoise(NoiseKey::ForInterval(seed, iv), p.LevelScale(iv.level));
    }
    errors[seed] = std::abs(z);
  }
  std::sort(errors.begin(), errors.end());
  for (double beta : {0.1, 0.01}) {
    const double quantile = errors[static_cast<int>((1.0 - beta) * kTrials)];
    EXPECT_LE(quantile, ErrorBoundExpiration(1024, beta, p)) << beta;
  }
}

}  // namespace
}  // namespace expiring_counter
