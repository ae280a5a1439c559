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

#include "expiring_counter/cli.h"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "expiring_counter/calibration.h"
#include "expiring_counter/mechanisms.h"
#include "expiring_counter/privacy_audit.h"

namespace expiring_counter::cli {
namespace {

// Bad or incomplete flags.
class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad stream data.
class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kFigureMse = 1000.0;

std::string Rounded(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.4g", value);
  return buf.data();
}

std::uint64_t RequireHorizon(const RunConfig& config) {
  if (!config.t_max || *config.t_max == 0) {
    throw UsageError("--t-max (stream length T >= 1) is required");
  }
  return *config.t_max;
}

double ParseProbability(std::string_view text) {
  double p = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(p >= 0.0 && p <= 1.0)) {
    throw UsageError("bernoulli probability must be a number in [0, 1]");
  }
  return p;
}

std::vector<double> Generate(const RunConfig& config) {
  const std::uint64_t horizon = RequireHorizon(config);
  const std::string& g = config.generator;
  if (g == "zeros") return std::vector<double>(horizon, 0.0);
  if (g == "ones") return std::vector<double>(horizon, 1.0);
  constexpr std::string_view kPrefix = "bernoulli(";
  if (g.size() > kPrefix.size() + 1 && g.starts_with(kPrefix) && g.back() == ')') {
    const double p = ParseProbability(
        std::string_view(g).substr(kPrefix.size(), g.size() - kPrefix.size() - 1));
    std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
    std::vector<double> values(horizon);
    for (double& v : values) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v = u < p ? 1.0 : 0.0;
    }
    return values;
  }
  throw UsageError("unknown generator '" + g + "' (zeros, ones, bernoulli(p))");
}

std::vector<double> ReadStream(const RunConfig& config) {
  std::ifstream in(config.input);
  if (!in) throw InputError("cannot open input file " + config.input);
  std::vector<double> values;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view text(line.data() + first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw InputError(config.input + ":" + std::to_string(line_no) +
                       ": not a number: '" + std::string(text) + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InputError(config.input + ":" + std::to_string(line_no) +
                       ": value " + std::string(text) + " outside [0, 1]");
    }
    values.push_back(v);
    if (config.t_max && values.size() == *config.t_max) break;
  }
  return values;
}

std::vector<double> LoadStream(const RunConfig& config) {
  if (!config.input.empty() && !config.generator.empty()) {
    throw UsageError("use either --input or --generator, not both");
  }
  if (!config.input.empty()) return ReadStream(config);
  if (!config.generator.empty()) return Generate(config);
  throw UsageError("one of --input or --generator is required");
}

MechanismParams ResolveExpiration(const RunConfig& config, double lambda,
                                  std::uint64_t delay, std::uint64_t horizon) {
  MechanismParams params{0.0, lambda, delay};
  if (config.epsilon) {
    params.epsilon = *config.epsilon;
  } else if (config.mse) {
    params = CalibrateEpsilon(*config.mse, horizon, lambda, delay).params;
  } else {
    throw UsageError("--epsilon or --mse is required");
  }
  params.Validate();
  return params;
}

BaselineParams ResolveBaseline(const RunConfig& config, std::uint64_t horizon) {
  if (config.window == 0) throw UsageError("--window (W >= 1) is required");
  if (config.eps_cur && config.eps_past) {
    BaselineParams params{config.window, *config.eps_cur, *config.eps_past};
    params.Validate();
    return params;
  }
  if (!config.mse) {
    throw UsageError("--eps-cur and --eps-past, or --mse, are required");
  }
  if (config.optimal_ratio) {
    return OptimalRatio(*config.mse, horizon, config.window).calibration.params;
  }
  return CalibrateBaseline(*config.mse, horizon, config.window, config.ratio).params;
}

std::unique_ptr<ContinualCounter> MakeCounter(const RunConfig& config,
                                              std::uint64_t horizon) {
  const NoiseSource noise = NoiseSource::Keyed(config.seed);
  switch (config.mechanism) {
    case Mechanism::kSimple:
      if (!config.epsilon) throw UsageError("--epsilon is required");
      return std::make_unique<SimpleCounter>(*config.epsilon, noise);
    case Mechanism::kLog:
      return std::make_unique<LogCounter>(
          ResolveExpiration(config, 1.0, 0, horizon).epsilon, noise);
    case Mechanism::kExpiration:
      return std::make_unique<ExpirationCounter>(
          ResolveExpiration(config, config.lambda, config.delay, horizon), noise);
    case Mechanism::kBaseline:
      return std::make_unique<BaselineCounter>(ResolveBaseline(config, horizon),
                                               noise);
  }
  throw UsageError("unknown mechanism");
}

// Runs `body` against the configured output file, or `out` when none is set.
void WithOutput(const std::string& path, std::ostream& out,
                const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw InputError("cannot open output file " + path);
  body(file);
}

int Guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::domain_error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

void WriteCurve(std::ostream& os, const PrivacyLossCurve& curve,
                const std::function<std::string(std::uint64_t)>& theoretical) {
  os << "d,loss_empirical,loss_envelope,loss_theoretical\n";
  for (std::uint64_t d = 0; d < curve.size(); ++d) {
    os << d << ',' << FormatDouble(curve.loss[d]) << ','
       << FormatDouble(curve.envelope[d]) << ',' << theoretical(d) << '\n';
  }
}

// --- figures ---------------------------------------------------------------

struct Series {
  std::string name;
  std::vector<double> loss;
};

struct ParameterRow {
  std::string series;
  std::string mechanism;
  std::string lambda;
  std::string window;
  std::string epsilon;
  std::string eps_cur;
  std::string eps_past;
  std::string ratio;
};

struct FigureBundle {
  std::uint64_t horizon = 0;
  std::vector<Series> series;
  std::vector<ParameterRow> parameters;
};

void AddExpiration(FigureBundle& fig, double lambda, bool with_theoretical) {
  const ExpirationCalibration cal = CalibrateEpsilon(kFigureMse, fig.horizon, lambda);
  const std::uint64_t d_max = fig.horizon - 1;
  const std::string tag = "lambda" + Rounded(lambda);
  fig.series.push_back({tag + "_empirical", AuditExpirationCurve(cal.params, d_max).loss});
  fig.parameters.push_back({tag + "_empirical", "expiration", FormatDouble(lambda),
                            "", FormatDouble(cal.params.epsilon), "", "", ""});
  if (with_theoretical) {
    std::vector<double> g(d_max + 1);
    for (std::uint64_t d = 0; d <= d_max; ++d) {
      g[d] = DominatingTheoreticalG(d, cal.params);
    }
    fig.series.push_back({tag + "_theoretical", std::move(g)});
    fig.parameters.push_back({tag + "_theoretical", "expiration",
                              FormatDouble(lambda), "",
                              FormatDouble(cal.params.epsilon), "", "", ""});
  }
}

void AddBaseline(FigureBundle& fig, std::uint64_t window, bool optimal) {
  const BaselineCalibration cal =
      optimal ? OptimalRatio(kFigureMse, fig.horizon, window).calibration
              : CalibrateBaseline(kFigureMse, fig.horizon, window, 0.1);
  const std::string tag = "baseline_w" + std::to_string(window);
  fig.series.push_back(
      {tag, AuditBaselineCurve(cal.params, fig.horizon - 1).loss});
  fig.parameters.push_back(
      {tag, "baseline", "", std::to_string(window), "",
       FormatDouble(cal.params.eps_cur), FormatDouble(cal.params.eps_past),
       FormatDouble(cal.params.eps_past / cal.params.eps_cur)});
}

FigureBundle BuildFigure(std::string_view id) {
  FigureBundle fig;
  if (id == "2a") {
    fig.horizon = 1000;
    AddExpiration(fig, 2.0, true);
  } else if (id == "2b") {
    fig.horizon = 1000;
    for (double lambda : {1.0, 2.0, 3.0}) AddExpiration(fig, lambda, false);
  } else if (id == "3" || id == "5a") {
    fig.horizon = 1000;
    for (std::uint64_t w : {31, 63, 127}) AddBaseline(fig, w, id == "5a");
  } else if (id == "4" || id == "5b") {
    fig.horizon = 1000000;
    for (double lambda : {1.0, 2.0, 3.0}) AddExpiration(fig, lambda, false);
    for (std::uint64_t w : {127, 1023}) AddBaseline(fig, w, id == "5b");
  } else {
    throw UsageError("unknown figure id '" + std::string(id) + "'");
  }
  return fig;
}

}  // namespace

std::string FormatDouble(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

int CmdRun(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const std::vector<double> stream = LoadStream(config);
    const std::unique_ptr<ContinualCounter> counter =
        MakeCounter(config, std::max<std::uint64_t>(stream.size(), 1));
    WithOutput(config.output, out, [&](std::ostream& os) {
      os << "t,true_sum,released,abs_error\n";
      double true_sum = 0.0;
      for (std::size_t i = 0; i < stream.size(); ++i) {
        true_sum += stream[i];
        const double released = counter->Step(stream[i]);
        os << i + 1 << ',' << FormatDouble(true_sum) << ','
           << FormatDouble(released) << ','
           << FormatDouble(std::abs(released - true_sum)) << '\n';
      }
    });
  });
}

int CmdAudit(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    if (!config.d_max) throw UsageError("--d-max is required");
    const std::uint64_t d_max = *config.d_max;
    const std::uint64_t horizon = config.t_max.value_or(kUnboundedHorizon);
    // Calibration normalizes the MSE over T = d_max + 1 releases.
    const std::uint64_t mse_horizon = d_max + 1;
    switch (config.mechanism) {
      case Mechanism::kLog:
      case Mechanism::kExpiration: {
        const bool log = config.mechanism == Mechanism::kLog;
        const MechanismParams params =
            ResolveExpiration(config, log ? 1.0 : config.lambda,
                              log ? 0 : config.delay, mse_horizon);
        const PrivacyLossCurve curve = AuditExpirationCurve(params, d_max, horizon);
        WithOutput(config.output, out, [&](std::ostream& os) {
          WriteCurve(os, curve, [&](std::uint64_t d) {
            return FormatDouble(DominatingTheoreticalG(d, params));
          });
        });
        return;
      }
      case Mechanism::kBaseline: {
        const BaselineParams params = ResolveBaseline(config, mse_horizon);
        const PrivacyLossCurve curve = AuditBaselineCurve(params, d_max, horizon);
        WithOutput(config.output, out, [&](std::ostream& os) {
          WriteCurve(os, curve, [](std::uint64_t) { return std::string(); });
        });
        return;
      }
      case Mechanism::kSimple:
        throw UsageError("audit supports the log, expiration and baseline mechanisms");
    }
  });
}

int CmdCalibrate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    if (!config.mse) throw UsageError("--mse is required");
    const std::uint64_t horizon = RequireHorizon(config);
    std::vector<std::pair<std::string, double>> rows;
    switch (config.mechanism) {
      case Mechanism::kLog:
      case Mechanism::kExpiration: {
        const bool log = config.mechanism == Mechanism::kLog;
        const ExpirationCalibration cal =
            CalibrateEpsilon(*config.mse, horizon, log ? 1.0 : config.lambda,
                             log ? 0 : config.delay);
        rows = {{"epsilon", cal.params.epsilon}, {"achieved_mse", cal.achieved_mse}};
        break;
      }
      case Mechanism::kBaseline: {
        if (config.window == 0) throw UsageError("--window (W >= 1) is required");
        BaselineCalibration cal;
        if (config.optimal_ratio) {
          const OptimalRatioResult opt = OptimalRatio(*config.mse, horizon, config.window);
          cal = opt.calibration;
          rows.push_back({"ratio", opt.ratio});
          rows.push_back({"objective", opt.objective});
        } else {
          cal = CalibrateBaseline(*config.mse, horizon, config.window, config.ratio);
          rows.push_back({"ratio", config.ratio});
        }
        rows.push_back({"eps_cur", cal.params.eps_cur});
        rows.push_back({"eps_past", cal.params.eps_past});
        rows.push_back({"achieved_mse", cal.achieved_mse});
        break;
      }
      case Mechanism::kSimple:
        throw UsageError("calibrate supports the log, expiration and baseline mechanisms");
    }
    WithOutput(config.output, out, [&](std::ostream& os) {
      os << "parameter,value,rounded\n";
      for (const auto& [name, value] : rows) {
        os << name << ',' << FormatDouble(value) << ',' << Rounded(value) << '\n';
      }
    });
  });
}

int CmdFigures(std::string_view figure, const std::string& directory,
               std::ostream& err) {
  return Guarded(err, [&] {
    const FigureBundle fig = BuildFigure(figure);
    const std::filesystem::path dir = directory.empty() ? "." : directory;
    std::filesystem::create_directories(dir);
    const std::string prefix = "fig" + std::string(figure) + "_";
    for (const Series& s : fig.series) {
      WithOutput((dir / (prefix + s.name + ".csv")).string(), std::cout,
                 [&](std::ostream& os) {
                   os << "d,loss\n";
                   for (std::size_t d = 0; d < s.loss.size(); ++d) {
                     os << d << ',' << FormatDouble(s.loss[d]) << '\n';
                   }
                 });
    }
    WithOutput((dir / (prefix + "parameters.csv")).string(), std::cout,
               [&](std::ostream& os) {
                 os << "series,mechanism,lambda,window,epsilon,eps_cur,eps_past,"
                       "ratio,horizon,mse\n";
                 for (const ParameterRow& p : fig.parameters) {
                   os << p.series << ',' << p.mechanism << ',' << p.lambda << ','
                      << p.window << ',' << p.epsilon << ',' << p.eps_cur << ','
                      << p.eps_past << ',' << p.ratio << ',' << fig.horizon << ','
                      << FormatDouble(kFigureMse) << '\n';
                 }
               });
  });
}

int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Continual counting with gradual privacy expiration"};
  app.require_subcommand(1);

  RunConfig config;
  std::string mechanism = "expiration";
  std::string figure;
  const std::map<std::string, Mechanism> mechanisms = {
      {"simple", Mechanism::kSimple},
      {"log", Mechanism::kLog},
      {"expiration", Mechanism::kExpiration},
      {"baseline", Mechanism::kBaseline}};

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--mechanism", mechanism, "simple | log | expiration | baseline")
        ->check(CLI::IsMember({"simple", "log", "expiration", "baseline"}));
    cmd->add_option("--epsilon", config.epsilon, "privacy parameter");
    cmd->add_option("--lambda", config.lambda, "level-budget exponent (>= 0)");
    cmd->add_option("--delay", config.delay, "delay B in steps");
    cmd->add_option("--window", config.window, "baseline round length W");
    cmd->add_option("--eps-cur", config.eps_cur, "baseline in-round budget");
    cmd->add_option("--eps-past", config.eps_past, "baseline past-prefix budget");
    cmd->add_option("--ratio", config.ratio, "eps_past / eps_cur (default 0.1)");
    cmd->add_flag("--optimal-ratio", config.optimal_ratio,
                  "pick the ratio minimizing the final privacy loss");
    cmd->add_option("--mse", config.mse, "target mean-squared error");
    cmd->add_option("--t-max", config.t_max, "stream length / horizon T");
    cmd->add_option("--seed", config.seed, "noise seed");
    cmd->add_option("--output", config.output, "output file");
  };

  CLI::App* run = app.add_subcommand("run", "run a mechanism over a stream");
  add_common(run);
  run->add_option("--input", config.input, "file with one value in [0, 1] per line");
  run->add_option("--generator", config.generator, "zeros | ones | bernoulli(p)");

  CLI::App* audit = app.add_subcommand("audit", "worst-case privacy-loss curve");
  add_common(audit);
  audit->add_option("--d-max", config.d_max, "largest elapsed time d")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "solve for a target MSE");
  add_common(calibrate);

  CLI::App* figures = app.add_subcommand("figures", "write figure data as CSV");
  figures->add_option("figure", figure, "2a | 2b | 3 | 4 | 5a | 5b")
      ->required()
      ->check(CLI::IsMember(FigureIds()));
  figures->add_option("--output", config.output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsageError;
  }
  config.mechanism = mechanisms.at(mechanism);

  if (run->parsed()) return CmdRun(config, out, err);
  if (audit->parsed()) return CmdAudit(config, out, err);
  if (calibrate->parsed()) return CmdCalibrate(config, out, err);
  return CmdFigures(figure, config.output, err);
}

}  // namespace expiring_counter::cli
