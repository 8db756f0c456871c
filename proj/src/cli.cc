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

#include "nneq/cli.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "nneq/parallel.h"

namespace nneq {
namespace {

using Json = nlohmann::ordered_json;

double parse_real(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE ||
      !std::isfinite(value)) {
    throw ConfigError("invalid number for " + std::string(what) + ": '" + s +
                      "'");
  }
  return value;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long value = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size() ||
      errno == ERANGE) {
    throw ConfigError("invalid count for " + std::string(what) + ": '" + s +
                      "'");
  }
  return static_cast<std::size_t>(value);
}

std::vector<std::string_view> split_colon(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// 12 significant digits; -0 prints as 0.
std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x + 0.0);
  return buf;
}

const char* csv_bool(bool b) { return b ? "true" : "false"; }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

std::string join_numbers(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ";";
    s += csv_number(values[i]);
  }
  return s;
}

std::vector<std::string> report_cells(const EquilibriumReport& r) {
  return {csv_number(r.fees.p_tilde),   csv_number(r.fees.q_N),
          csv_number(r.fees.q_NN),      csv_number(r.fees.p_N),
          csv_number(r.fees.p_NN),      csv_number(r.fees.delta_q()),
          csv_number(r.split.n_N),      csv_number(r.split.n_NN),
          csv_number(r.payoffs.pi_N),   csv_number(r.payoffs.pi_NN),
          csv_number(r.payoffs.pi_G),   std::string(to_string(r.branch.branch)),
          csv_bool(r.split.interior),   csv_bool(r.coverage.isp_ok),
          csv_bool(r.coverage.cp_ok)};
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  out += '\n';
}

Json params_json(const MarketParams& p) {
  return Json{{"v", p.v()}, {"v_star", p.v_star()}, {"t", p.t()}, {"c", p.c()}};
}

Json report_json(const EquilibriumReport& r) {
  Json j;
  j["params"] = params_json(r.params);
  j["coverage_sufficient"] = r.coverage_sufficient;
  j["fees"] = Json{{"p_tilde", r.fees.p_tilde}, {"q_N", r.fees.q_N},
                   {"q_NN", r.fees.q_NN},       {"p_N", r.fees.p_N},
                   {"p_NN", r.fees.p_NN},       {"delta_q", r.fees.delta_q()}};
  j["split"] = Json{{"n_N", r.split.n_N},
                    {"n_NN", r.split.n_NN},
                    {"n_sub_N", r.split.n_sub_N},
                    {"n_sub_NN", r.split.n_sub_NN},
                    {"interior", r.split.interior}};
  j["payoffs"] = Json{{"pi_N", r.payoffs.pi_N},
                      {"pi_NN", r.payoffs.pi_NN},
                      {"pi_G", r.payoffs.pi_G}};
  j["branch"] = std::string(to_string(r.branch.branch));
  j["coverage"] = Json{{"isp_ok", r.coverage.isp_ok}, {"cp_ok", r.coverage.cp_ok}};
  j["p_tilde_plateau"] = r.p_tilde_plateau;
  j["warnings"] = report_warnings(r);
  return j;
}

Json policy_json(const TransitFeePolicy& policy) {
  if (const auto* given = std::get_if<GivenTransitFee>(&policy)) {
    return Json{{"given", given->value}};
  }
  return "minimal_plateau";
}

double json_real(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(std::string("config: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

MarketParams make_params(double v, double v_star, double t, double c) {
  try {
    return MarketParams(v, v_star, t, c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

MarketParams with_swept(const MarketParams& p, SweepParam param, double value) {
  switch (param) {
    case SweepParam::v: return make_params(value, p.v_star(), p.t(), p.c());
    case SweepParam::v_star: return make_params(p.v(), value, p.t(), p.c());
    case SweepParam::t: return make_params(p.v(), p.v_star(), value, p.c());
    case SweepParam::c: return make_params(p.v(), p.v_star(), p.t(), value);
    case SweepParam::p_tilde: return p;
  }
  return p;
}

GridSpec parse_grid_spec(std::string_view text) {
  const auto parts = split_colon(text);
  if (parts.size() != 3) {
    throw ConfigError("grid must look like <lo>:<hi>:<steps>, got '" +
                      std::string(text) + "'");
  }
  GridSpec grid{parse_real(parts[0], "grid lo"), parse_real(parts[1], "grid hi"),
                parse_count(parts[2], "grid steps")};
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return grid;
}

Stage parse_stage(const std::string& name) {
  if (name == "all" || name == "All") return Stage::All;
  if (name == "4" || name == "stage4" || name == "Stage4") return Stage::Stage4;
  if (name == "3" || name == "stage3" || name == "Stage3") return Stage::Stage3;
  if (name == "2" || name == "stage2" || name == "Stage2") return Stage::Stage2;
  if (name == "1" || name == "stage1" || name == "Stage1") return Stage::Stage1;
  throw ConfigError("unknown stage '" + name + "' (use all, 1, 2, 3 or 4)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("cannot write output file '" + path + "'");
  file << text;
  if (!file) throw ConfigError("failed writing output file '" + path + "'");
}

// Flags shared by the three subcommands. Unset flags leave the config alone.
struct CommonFlags {
  double v = 0, v_star = 0, t = 0, c = 0, p_tilde = 0;
  CLI::Option* v_opt = nullptr;
  CLI::Option* v_star_opt = nullptr;
  CLI::Option* t_opt = nullptr;
  CLI::Option* c_opt = nullptr;
  CLI::Option* p_tilde_opt = nullptr;
  CLI::Option* plateau_opt = nullptr;
  std::string sweep, format, out, config, save_config;
  unsigned jobs = 1;

  void attach(CLI::App& app) {
    v_opt = app.add_option("--v", v, "valuation of Internet access");
    v_star_opt = app.add_option("--v-star", v_star, "valuation of the content");
    t_opt = app.add_option("--t", t, "marginal transport cost (> 0)");
    c_opt = app.add_option("--c", c, "per-connection cost (>= 0)");
    p_tilde_opt =
        app.add_option("--p-tilde", p_tilde, "transit fee charged by ISP NN");
    plateau_opt = app.add_flag("--plateau-min",
                               "use the smallest payoff-maximizing transit fee");
    p_tilde_opt->excludes(plateau_opt);
    app.add_option("--sweep", sweep, "<name>:<lo>:<hi>:<steps>");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out, "output path (default stdout)");
    app.add_option("--config", config, "JSON scenario config");
    app.add_option("--save-config", save_config,
                   "write the effective config as JSON");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }

  ScenarioConfig resolve() const {
    ScenarioConfig cfg;
    if (!config.empty()) cfg = config_from_json(read_file(config));
    const MarketParams& p = cfg.params;
    cfg.params = make_params(*v_opt ? v : p.v(), *v_star_opt ? v_star : p.v_star(),
                             *t_opt ? t : p.t(), *c_opt ? c : p.c());
    if (*p_tilde_opt) {
      if (!std::isfinite(p_tilde)) throw ConfigError("--p-tilde must be finite");
      cfg.p_tilde_policy = GivenTransitFee{p_tilde};
    }
    if (*plateau_opt) cfg.p_tilde_policy = MinimalPlateau{};
    if (!sweep.empty()) cfg.sweep = parse_sweep_spec(sweep);
    if (!format.empty()) {
      cfg.output.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    }
    if (!out.empty()) cfg.output.path = out;
    cfg.validate();
    return cfg;
  }
};

void print_warnings(const EquilibriumReport& report, std::ostream& err) {
  for (const std::string& w : report_warnings(report)) {
    err << "warning: " << w << '\n';
  }
}

int cmd_solve(const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  const EquilibriumReport report = solve_spe(cfg.params, cfg.p_tilde_policy);
  print_warnings(report, err);
  const OutputFormat format = cfg.output.format.value_or(OutputFormat::Json);
  emit(format == OutputFormat::Csv ? render_report_csv(report)
                                   : render_report_json(report),
       cfg.output.path, out);
  return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, unsigned jobs, std::ostream& out,
              std::ostream& err) {
  if (!cfg.sweep) throw ConfigError("sweep needs --sweep or a config sweep");
  const std::vector<SweepRow> rows = run_sweep(cfg, jobs);
  std::size_t flagged = 0;
  for (const SweepRow& row : rows) {
    if (!report_warnings(row.report).empty()) ++flagged;
  }
  if (flagged > 0) {
    err << "warning: " << flagged << " of " << rows.size()
        << " sweep points violate coverage or interior conditions\n";
  }
  const OutputFormat format = cfg.output.format.value_or(OutputFormat::Csv);
  emit(format == OutputFormat::Csv ? render_sweep_csv(rows)
                                   : render_sweep_json(cfg, rows),
       cfg.output.path, out);
  return 0;
}

}  // namespace

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::v: return "v";
    case SweepParam::v_star: return "v_star";
    case SweepParam::t: return "t";
    case SweepParam::c: return "c";
    case SweepParam::p_tilde: return "p_tilde";
  }
  return "?";
}

SweepParam parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::v, SweepParam::v_star, SweepParam::t,
                       SweepParam::c, SweepParam::p_tilde}) {
    if (name == to_string(p)) return p;
  }
  if (name == "v-star") return SweepParam::v_star;
  if (name == "p-tilde") return SweepParam::p_tilde;
  throw ConfigError("unknown sweep parameter '" + std::string(name) +
                    "' (use v, v_star, t, c or p_tilde)");
}

double SweepSpec::at(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

namespace {

void check_sweep(const SweepSpec& sweep) {
  if (!std::isfinite(sweep.lo) || !std::isfinite(sweep.hi) ||
      !(sweep.lo < sweep.hi) || sweep.steps < 2) {
    throw ConfigError("sweep needs finite lo < hi and steps >= 2");
  }
}

}  // namespace

SweepSpec parse_sweep_spec(std::string_view text) {
  const auto parts = split_colon(text);
  if (parts.size() != 4) {
    throw ConfigError("sweep must look like <name>:<lo>:<hi>:<steps>, got '" +
                      std::string(text) + "'");
  }
  SweepSpec spec{parse_sweep_param(parts[0]), parse_real(parts[1], "sweep lo"),
                 parse_real(parts[2], "sweep hi"),
                 parse_count(parts[3], "sweep steps")};
  check_sweep(spec);
  return spec;
}

void ScenarioConfig::validate() const {
  if (sweep) check_sweep(*sweep);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  auto same_policy = [](const TransitFeePolicy& x, const TransitFeePolicy& y) {
    if (x.index() != y.index()) return false;
    if (const auto* gx = std::get_if<GivenTransitFee>(&x)) {
      return gx->value == std::get<GivenTransitFee>(y).value;
    }
    return true;
  };
  return a.params == b.params && same_policy(a.p_tilde_policy, b.p_tilde_policy) &&
         a.sweep == b.sweep && a.output == b.output;
}

std::string config_to_json(const ScenarioConfig& config) {
  Json j;
  j["params"] = params_json(config.params);
  j["p_tilde_policy"] = policy_json(config.p_tilde_policy);
  if (config.sweep) {
    j["sweep"] = Json{{"param", std::string(to_string(config.sweep->param))},
                      {"lo", config.sweep->lo},
                      {"hi", config.sweep->hi},
                      {"steps", config.sweep->steps}};
  } else {
    j["sweep"] = nullptr;
  }
  Json output = Json::object();
  if (config.output.format) {
    output["format"] = *config.output.format == OutputFormat::Csv ? "csv" : "json";
  }
  output["path"] = config.output.path;
  j["output"] = output;
  return j.dump(2) + "\n";
}

ScenarioConfig config_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ScenarioConfig cfg;
  try {
    if (j.contains("params")) {
      const Json& p = j.at("params");
      cfg.params = make_params(json_real(p, "v"), json_real(p, "v_star"),
                               json_real(p, "t"), json_real(p, "c"));
    }
    if (j.contains("p_tilde_policy")) {
      const Json& policy = j.at("p_tilde_policy");
      if (policy.is_string() && policy.get<std::string>() == "minimal_plateau") {
        cfg.p_tilde_policy = MinimalPlateau{};
      } else if (policy.is_object() && policy.contains("given")) {
        cfg.p_tilde_policy = GivenTransitFee{json_real(policy, "given")};
      } else {
        throw ConfigError(
            "p_tilde_policy must be \"minimal_plateau\" or {\"given\": <real>}");
      }
    }
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
      const Json& s = j.at("sweep");
      if (!s.contains("param") || !s.at("param").is_string() ||
          !s.contains("steps") || !s.at("steps").is_number_unsigned()) {
        throw ConfigError("sweep needs string 'param' and unsigned 'steps'");
      }
      cfg.sweep = SweepSpec{parse_sweep_param(s.at("param").get<std::string>()),
                            json_real(s, "lo"), json_real(s, "hi"),
                            s.at("steps").get<std::size_t>()};
    }
    if (j.contains("output") && !j.at("output").is_null()) {
      const Json& o = j.at("output");
      if (o.contains("format")) {
        const std::string f = o.at("format").get<std::string>();
        if (f == "csv") {
          cfg.output.format = OutputFormat::Csv;
        } else if (f == "json") {
          cfg.output.format = OutputFormat::Json;
        } else {
          throw ConfigError("output.format must be csv or json");
        }
      }
      if (o.contains("path")) cfg.output.path = o.at("path").get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") +
                      e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& config, unsigned jobs) {
  config.validate();
  if (!config.sweep) throw ConfigError("no sweep configured");
  const SweepSpec& sweep = *config.sweep;

  // Build every market first so an invalid point fails before any work.
  std::vector<MarketParams> markets;
  markets.reserve(sweep.steps);
  for (std::size_t i = 0; i < sweep.steps; ++i) {
    markets.push_back(with_swept(config.params, sweep.param, sweep.at(i)));
  }

  std::vector<std::optional<SweepRow>> rows(sweep.steps);
  parallel_for(sweep.steps, jobs, [&](std::size_t i) {
    const double value = sweep.at(i);
    const TransitFeePolicy policy = sweep.param == SweepParam::p_tilde
                                        ? TransitFeePolicy{GivenTransitFee{value}}
                                        : config.p_tilde_policy;
    rows[i] = SweepRow{value, solve_spe(markets[i], policy)};
  });

  std::vector<SweepRow> out;
  out.reserve(rows.size());
  for (auto& row : rows) out.push_back(std::move(*row));
  return out;
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> columns = {
      "swept_value", "p_tilde", "q_N",   "q_NN",  "p_N",      "p_NN",
      "delta_q",     "n_N",     "n_NN",  "pi_N",  "pi_NN",    "pi_G",
      "branch",      "interior", "coverage_isp", "coverage_cp"};
  return columns;
}

std::string render_report_csv(const EquilibriumReport& report) {
  std::string out;
  const auto& columns = sweep_columns();
  append_row(out, std::vector<std::string>(columns.begin() + 1, columns.end()));
  append_row(out, report_cells(report));
  return out;
}

std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  append_row(out, sweep_columns());
  for (const SweepRow& row : rows) {
    std::vector<std::string> cells = {csv_number(row.swept_value)};
    for (std::string& cell : report_cells(row.report)) {
      cells.push_back(std::move(cell));
    }
    append_row(out, cells);
  }
  return out;
}

std::string render_report_json(const EquilibriumReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string render_sweep_json(const ScenarioConfig& config,
                              const std::vector<SweepRow>& rows) {
  Json j;
  if (config.sweep) {
    j["sweep"] = Json{{"param", std::string(to_string(config.sweep->param))},
                      {"lo", config.sweep->lo},
                      {"hi", config.sweep->hi},
                      {"steps", config.sweep->steps}};
  }
  Json list = Json::array();
  for (const SweepRow& row : rows) {
    Json entry = report_json(row.report);
    entry["swept_value"] = row.swept_value;
    list.push_back(std::move(entry));
  }
  j["rows"] = std::move(list);
  return j.dump(2) + "\n";
}

std::string render_verdicts_csv(const std::vector<OracleVerdict>& verdicts) {
  std::string out =
      "target,pass,discrepancy,tolerance,closed_form,oracle,diagnostics\n";
  for (const OracleVerdict& v : verdicts) {
    append_row(out, {csv_quote(v.target), csv_bool(v.pass),
                     csv_number(v.discrepancy), csv_number(v.tolerance_used),
                     join_numbers(v.closed_form_value),
                     join_numbers(v.oracle_value), csv_quote(v.diagnostics)});
  }
  return out;
}

std::string render_verdicts_json(const std::vector<OracleVerdict>& verdicts) {
  Json list = Json::array();
  std::size_t failures = 0;
  for (const OracleVerdict& v : verdicts) {
    if (!v.pass) ++failures;
    list.push_back(Json{{"target", v.target},
                        {"pass", v.pass},
                        {"discrepancy", v.discrepancy},
                        {"tolerance_used", v.tolerance_used},
                        {"closed_form_value", v.closed_form_value},
                        {"oracle_value", v.oracle_value},
                        {"diagnostics", v.diagnostics}});
  }
  Json j;
  j["verdicts"] = std::move(list);
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string render_verdicts_text(const std::vector<OracleVerdict>& verdicts) {
  std::string out;
  std::size_t failures = 0;
  for (const OracleVerdict& v : verdicts) {
    if (!v.pass) ++failures;
    out += v.pass ? "PASS " : "FAIL ";
    out += v.target + "  discrepancy=" + csv_number(v.discrepancy) +
           " tolerance=" + csv_number(v.tolerance_used);
    if (!v.diagnostics.empty()) out += "  [" + v.diagnostics + "]";
    out += '\n';
  }
  out += std::to_string(verdicts.size() - failures) + "/" +
         std::to_string(verdicts.size()) + " verdicts passed\n";
  return out;
}

std::vector<std::string> report_warnings(const EquilibriumReport& report) {
  std::vector<std::string> warnings;
  if (!report.coverage_sufficient) {
    warnings.push_back("v < 2t + c: full ISP coverage is not guaranteed");
  }
  if (!report.coverage.isp_ok) {
    warnings.push_back("coverage_ok = false: some users prefer to opt out");
  }
  if (!report.coverage.cp_ok) {
    warnings.push_back("cp_coverage_ok = false: some users would skip the content");
  }
  if (!report.split.interior) {
    warnings.push_back("indifferent user outside [0, 1]: split is clamped");
  }
  return warnings;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Equilibrium solver for the two-ISP net-neutrality market game",
               "nneq"};
  app.require_subcommand(1);

  CommonFlags solve_flags, sweep_flags, verify_flags;
  CLI::App* solve = app.add_subcommand("solve", "solve one scenario");
  solve_flags.attach(*solve);
  CLI::App* sweep = app.add_subcommand("sweep", "tabulate a parameter sweep");
  sweep_flags.attach(*sweep);
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "check the closed forms against brute force");
  verify_flags.attach(*verify_cmd);
  bool deep = false;
  std::uint64_t seed = 1;
  std::string stage_name = "all";
  std::string transit_grid;
  std::size_t probes = 8;
  verify_cmd->add_flag("--deep", deep, "slow grid and simulation checks");
  verify_cmd->add_option("--seed", seed, "seed for random probes");
  verify_cmd->add_option("--stage", stage_name, "all, 1, 2, 3 or 4");
  verify_cmd->add_option("--p-tilde-grid", transit_grid,
                         "transit-fee grid <lo>:<hi>:<steps>");
  verify_cmd->add_option("--probes", probes, "random probes per stage");

  std::vector<std::string> argv_storage = {"nneq"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (solve->parsed()) {
      const ScenarioConfig cfg = solve_flags.resolve();
      if (!solve_flags.save_config.empty()) {
        emit(config_to_json(cfg), solve_flags.save_config, out);
      }
      return cmd_solve(cfg, out, err);
    }
    if (sweep->parsed()) {
      const ScenarioConfig cfg = sweep_flags.resolve();
      if (!sweep_flags.save_config.empty()) {
        emit(config_to_json(cfg), sweep_flags.save_config, out);
      }
      return cmd_sweep(cfg, sweep_flags.jobs, out, err);
    }
    const ScenarioConfig cfg = verify_flags.resolve();
    if (!verify_flags.save_config.empty()) {
      emit(config_to_json(cfg), verify_flags.save_config, out);
    }
    VerifyOptions options;
    options.deep = deep;
    options.seed = seed;
    options.jobs = verify_flags.jobs;
    options.random_probes = probes;
    if (!transit_grid.empty()) options.transit_grid = parse_grid_spec(transit_grid);
    const Stage stage = parse_stage(stage_name);
    if (!cfg.params.coverage_sufficient()) {
      err << "warning: v < 2t + c: stage-4 probes may fall back to "
             "partial-participation shares\n";
    }
    const std::vector<OracleVerdict> verdicts = verify(cfg.params, stage, options);
    std::string text;
    if (!cfg.output.format) {
      text = render_verdicts_text(verdicts);
    } else if (*cfg.output.format == OutputFormat::Csv) {
      text = render_verdicts_csv(verdicts);
    } else {
      text = render_verdicts_json(verdicts);
    }
    emit(text, cfg.output.path, out);
    for (const OracleVerdict& v : verdicts) {
      if (!v.pass) return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nneq
