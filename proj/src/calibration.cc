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
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "expiring_counter/dyadic.h"
#include "expiring_counter/noise.h"

namespace expiring_counter {
namespace {

constexpr double kRatioLow = 1e-6;
constexpr double kRatioHigh = 1e2;

void RequireTarget(double target_mse, std::uint64_t horizon) {
  if (!(target_mse > 0.0) || !std::isfinite(target_mse)) {
    throw std::domain_error("target MSE must be positive");
  }
  if (horizon == 0) throw std::domain_error("horizon must be >= 1");
}

// Unscaled sum_{l=0}^{top} (1 + l)^(2(1 - lambda)).
double LevelVarianceSum(std::uint32_t top, double lambda) {
  double sum = 0.0;
  for (std::uint32_t level = 0; level <= top; ++level) {
    sum += std::pow(1.0 + level, 2.0 * (1.0 - lambda));
  }
  return sum;
}

// sum_{s=1}^{n} popcount(s).
std::uint64_t PopcountPrefix(std::uint64_t n) {
  std::uint64_t total = 0;
  for (std::uint64_t s = 1; s <= n; ++s) total += std::popcount(s);
  return total;
}

}  // namespace

double NoiseVarianceExpiration(std::uint64_t t, const MechanismParams& params) {
  if (t <= params.delay) return 0.0;
  const double unscaled =
      LevelVarianceSum(FloorLog2(t - params.delay), params.lambda);
  return 2.0 * unscaled / (params.epsilon * params.epsilon);
}

double AnalyticMseExpiration(const MechanismParams& params, std::uint64_t horizon) {
  params.Validate();
  if (horizon == 0) throw std::domain_error("horizon must be >= 1");
  if (horizon <= params.delay) return 0.0;
  const std::uint64_t last = horizon - params.delay;
  // Releases with u = t - B in [2^m, 2^(m+1) - 1] share a variance.
  double total = 0.0;
  double level_sum = 0.0;
  for (std::uint32_t m = 0; m <= FloorLog2(last); ++m) {
    level_sum += std::pow(1.0 + m, 2.0 * (1.0 - params.lambda));
    const std::uint64_t first_u = std::uint64_t{1} << m;
    const std::uint64_t last_u = std::min(last, (first_u << 1) - 1);
    total += static_cast<double>(last_u - first_u + 1) * level_sum;
  }
  return 2.0 * total /
         (params.epsilon * params.epsilon * static_cast<double>(horizon));
}

double AnalyticMseBaseline(const BaselineParams& params, std::uint64_t horizon) {
  params.Validate();
  if (horizon == 0) throw std::domain_error("horizon must be >= 1");
  const std::uint64_t w = params.window;
  const std::uint64_t popcounts =
      (horizon / w) * PopcountPrefix(w) + PopcountPrefix(horizon % w);
  const double k = params.TreeDepth();
  const double tree =
      2.0 * k * k * static_cast<double>(popcounts) / (params.eps_cur * params.eps_cur);
  const double past = static_cast<double>(horizon - std::min(horizon, w)) * 2.0 /
                      (params.eps_past * params.eps_past);
  return (tree + past) / static_cast<double>(horizon);
}

ExpirationCalibration CalibrateEpsilon(double target_mse, std::uint64_t horizon,
                                       double lambda, std::uint64_t delay) {
  RequireTarget(target_mse, horizon);
  MechanismParams params{1.0, lambda, delay};
  const double unit_mse = AnalyticMseExpiration(params, horizon);
  if (!(unit_mse > 0.0)) {
    throw std::domain_error("every release falls inside the delay");
  }
  params.epsilon = std::sqrt(unit_mse / target_mse);
  return {params, AnalyticMseExpiration(params, horizon), horizon, target_mse};
}

BaselineCalibration CalibrateBaseline(double target_mse, std::uint64_t horizon,
                                      std::uint64_t window, double ratio) {
  RequireTarget(target_mse, horizon);
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw std::domain_error("ratio must be positive");
  }
  BaselineParams params{window, 1.0, ratio};
  const double eps_cur = std::sqrt(AnalyticMseBaseline(params, horizon) / target_mse);
  params.eps_cur = eps_cur;
  params.eps_past = ratio * eps_cur;
  return {params, AnalyticMseBaseline(params, horizon), horizon, target_mse};
}

OptimalRatioResult OptimalRatio(double target_mse, std::uint64_t horizon,
                                std::uint64_t window) {
  RequireTarget(target_mse, horizon);
  if (window < 1 || window >= horizon) {
    throw std::domain_error("optimal ratio needs 1 <= W < T");
  }
  const double later_rounds =
      static_cast<double>((horizon + window - 1) / window - 1);
  const auto objective = [&](double log_ratio) {
    const double ratio = std::exp(log_ratio);
    const double eps_cur =
        std::sqrt(AnalyticMseBaseline({window, 1.0, ratio}, horizon) / target_mse);
    return eps_cur * (1.0 + ratio * later_rounds);
  };
  const double lo = std::log(kRatioLow);
  const double hi = std::log(kRatioHigh);
  const auto [log_ratio, value] =
      boost::math::tools::brent_find_minima(objective, lo, hi, 40);
  if (log_ratio - lo < 1e-6 || hi - log_ratio < 1e-6) {
    std::ostringstream msg;
    msg << "no interior minimum of the privacy-loss objective in ratio ["
        << kRatioLow << ", " << kRatioHigh << "] for W=" << window
        << " T=" << horizon << " (best ratio " << std::exp(log_ratio)
        << ", objective " << value << ")";
    throw std::runtime_error(msg.str());
  }
  OptimalRatioResult result;
  result.ratio = std::exp(log_ratio);
  result.calibration = CalibrateBaseline(target_mse, horizon, window, result.ratio);
  result.objective = result.calibration.params.eps_cur +
                     result.calibration.params.eps_past * later_rounds;
  return result;
}

double ErrorBoundExpiration(std::uint64_t t, double beta,
                      const MechanismParams& params) {
  params.Validate();
  if (t <= params.delay) {
    throw std::domain_error("error bound needs t > delay");
  }
  std::vector<LaplaceScale> scales;
  for (std::uint32_t level = 0; level <= FloorLog2(t - params.delay); ++level) {
    scales.push_back(params.LevelScale(level));
  }
  return static_cast<double>(params.delay) + ConcentrationThreshold(scales, beta);
}

}  // namespace expiring_counter
