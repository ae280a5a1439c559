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

#ifndef EXPIRING_COUNTER_CALIBRATION_H_
#define EXPIRING_COUNTER_CALIBRATION_H_

#include <cstdint>

#include "expiring_counter/mechanisms.h"

namespace expiring_counter {

// Privacy parameters chosen so that the analytic MSE over releases 1..horizon
// equals target_mse.
template <typename Params>
struct CalibrationResult {
  Params params;
  double achieved_mse = 0.0;
  std::uint64_t horizon = 0;
  double target_mse = 0.0;
};

using ExpirationCalibration = CalibrationResult<MechanismParams>;
using BaselineCalibration = CalibrationResult<BaselineParams>;

// Noise variance of release t of the delayed counter:
// 2 * sum_{l=0}^{floor(log2(t - B))} (1 + l)^(2(1 - lambda)) / eps^2, and 0
// for t <= B.
double NoiseVarianceExpiration(std::uint64_t t, const MechanismParams& params);

// (1/T) * sum_{t=1}^{T} NoiseVarianceExpiration(t), summed exactly (grouped by
// level count, not approximated). The delay's deterministic deficit is not
// part of this figure.
double AnalyticMseExpiration(const MechanismParams& params, std::uint64_t horizon);

// (1/T) * [ sum_t 2 k^2 popcount(s_t) / eps_cur^2
//           + (T - min(T, W)) * 2 / eps_past^2 ]
// where s_t is the in-round position of step t and k the tree depth.
double AnalyticMseBaseline(const BaselineParams& params, std::uint64_t horizon);

// Since the MSE scales as 1/eps^2, eps = sqrt(mse(eps = 1) / target).
// Throws std::domain_error if target_mse <= 0, horizon == 0 or every release
// falls inside the delay.
ExpirationCalibration CalibrateEpsilon(double target_mse, std::uint64_t horizon,
                                       double lambda, std::uint64_t delay = 0);

// eps_past = ratio * eps_cur, eps_cur solved in closed form.
BaselineCalibration CalibrateBaseline(double target_mse, std::uint64_t horizon,
                                      std::uint64_t window, double ratio);

struct OptimalRatioResult {
  double ratio = 0.0;
  // eps_cur + eps_past * (N - 1) at the optimum, N = ceil(T / W).
  double objective = 0.0;
  BaselineCalibration calibration;
};

// Minimizes the loss of an input from the first round at the end of the
// stream, eps_cur + eps_past * (N - 1), over ratio = eps_past / eps_cur with
// the MSE held at target_mse. Brent's method on log(ratio) over
// [1e-6, 1e2], to a relative ratio tolerance well below 1e-6.
// Throws std::domain_error if window >= horizon (no refresh) and
// std::runtime_error when the minimum sits on the search boundary.
OptimalRatioResult OptimalRatio(double target_mse, std::uint64_t horizon,
                                std::uint64_t window);

// delay + ConcentrationThreshold over the level scales 0..floor(log2(t - B)):
// |release_t - sum_{i<=t} x_i| stays below this with probability >= 1 - beta.
// Throws std::domain_error if t <= delay or beta is not in (0, 1).
double ErrorBoundExpiration(std::uint64_t t, double beta,
                      const MechanismParams& params);

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_CALIBRATION_H_
