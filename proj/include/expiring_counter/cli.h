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

#ifndef EXPIRING_COUNTER_CLI_H_
#define EXPIRING_COUNTER_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace expiring_counter::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitUsageError = 2,
};

enum class Mechanism { kSimple, kLog, kExpiration, kBaseline };

struct RunConfig {
  Mechanism mechanism = Mechanism::kExpiration;
  std::optional<double> epsilon;
  double lambda = 1.0;
  std::uint64_t delay = 0;
  std::uint64_t window = 0;
  std::optional<double> eps_cur;
  std::optional<double> eps_past;
  double ratio = 0.1;
  bool optimal_ratio = false;
  std::optional<double> mse;
  std::optional<std::uint64_t> t_max;
  std::optional<std::uint64_t> d_max;
  std::uint64_t seed = 0;
  std::string input;      // file with one value per line
  std::string generator;  // zeros | ones | bernoulli(p)
  std::string output;     // file (run, audit, calibrate) or directory (figures)
};

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);

// Each command writes its CSV to `out` and diagnostics to `err`, and returns
// an ExitCode.
int CmdRun(const RunConfig& config, std::ostream& out, std::ostream& err);
int CmdAudit(const RunConfig& config, std::ostream& out, std::ostream& err);
int CmdCalibrate(const RunConfig& config, std::ostream& out, std::ostream& err);
// Writes one CSV per series plus a parameter table into `directory`.
int CmdFigures(std::string_view figure, const std::string& directory,
               std::ostream& err);

inline const std::vector<std::string>& FigureIds() {
  static const std::vector<std::string> ids = {"2a", "2b", "3", "4", "5a", "5b"};
  return ids;
}

// Full command line entry point (argv[0] is the program name).
int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

}  // namespace expiring_counter::cli

#endif  // EXPIRING_COUNTER_CLI_H_
