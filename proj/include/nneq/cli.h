// Copyright 2026 The nneq Authors
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

#ifndef NNEQ_CLI_H_
#define NNEQ_CLI_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nneq/equilibrium.h"
#include "nneq/market_model.h"
#include "nneq/oracle.h"

namespace nneq {

// Bad flags, unreadable or malformed config. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepParam { v, v_star, t, c, p_tilde };

std::string_view to_string(SweepParam param);
SweepParam parse_sweep_param(std::string_view name);

struct SweepSpec {
  SweepParam param = SweepParam::p_tilde;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 2;

  double at(std::size_t i) const;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

// "<name>:<lo>:<hi>:<steps>", e.g. "p_tilde:-2:2:401".
SweepSpec parse_sweep_spec(std::string_view text);

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  std::optional<OutputFormat> format;  // subcommand default when empty
  std::string path;                    // stdout when empty
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

// Defaults to the scenario t = 1, c = 1, v = 3.5, v* = 2 on the minimal
// plateau.
struct ScenarioConfig {
  MarketParams params{3.5, 2.0, 1.0, 1.0};
  TransitFeePolicy p_tilde_policy = MinimalPlateau{};
  std::optional<SweepSpec> sweep;
  OutputSpec output;

  // Throws ConfigError for a malformed sweep.
  void validate() const;
};

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

// Single JSON document with keys params, p_tilde_policy, sweep, output.
std::string config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(std::string_view text);

struct SweepRow {
  double swept_value = 0.0;
  EquilibriumReport report;
};

// One solve_spe per sweep point, in ascending sweep order whatever `jobs`
// is. Throws ConfigError if a swept value makes the market invalid.
std::vector<SweepRow> run_sweep(const ScenarioConfig& config, unsigned jobs = 1);

// Column header shared by sweep CSV output.
const std::vector<std::string>& sweep_columns();

// CSV with 12 significant digits, LF line endings.
std::string render_report_csv(const EquilibriumReport& report);
std::string render_sweep_csv(const std::vector<SweepRow>& rows);
// JSON with shortest round-trip numbers.
std::string render_report_json(const EquilibriumReport& report);
std::string render_sweep_json(const ScenarioConfig& config,
                              const std::vector<SweepRow>& rows);
std::string render_verdicts_csv(const std::vector<OracleVerdict>& verdicts);
std::string render_verdicts_json(const std::vector<OracleVerdict>& verdicts);
std::string render_verdicts_text(const std::vector<OracleVerdict>& verdicts);

// Human-readable warnings for coverage and interior violations.
std::vector<std::string> report_warnings(const EquilibriumReport& report);

// Entry point of the `nneq` executable. Returns the process exit code:
// 0 success, 1 verification failure, 2 usage or config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace nneq

#endif  // NNEQ_CLI_H_
