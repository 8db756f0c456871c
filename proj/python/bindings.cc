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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nneq/cli.h"
#include "nneq/equilibrium.h"
#include "nneq/market_model.h"
#include "nneq/oracle.h"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

nneq::TransitFeePolicy policy_from(std::optional<double> p_tilde) {
  if (p_tilde) return nneq::GivenTransitFee{*p_tilde};
  return nneq::MinimalPlateau{};
}

py::tuple run_cli_captured(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = nneq::run_cli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-form equilibrium and brute-force oracles for the two-ISP "
            "net-neutrality market game.";

  py::register_exception<nneq::OracleError>(m, "OracleError", PyExc_RuntimeError);
  py::register_exception<nneq::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<nneq::Isp>(m, "Isp").value("N", nneq::Isp::N).value("NN", nneq::Isp::NN);
  py::enum_<nneq::Branch>(m, "Branch")
      .value("B1", nneq::Branch::B1)
      .value("B2", nneq::Branch::B2)
      .value("B3", nneq::Branch::B3)
      .value("B4", nneq::Branch::B4);
  py::enum_<nneq::Stage>(m, "Stage")
      .value("Stage4", nneq::Stage::Stage4)
      .value("Stage3", nneq::Stage::Stage3)
      .value("Stage2", nneq::Stage::Stage2)
      .value("Stage1", nneq::Stage::Stage1)
      .value("All", nneq::Stage::All);

  py::class_<nneq::MarketParams>(m, "MarketParams")
      .def(py::init<double, double, double, double>(), "v"_a, "v_star"_a, "t"_a,
           "c"_a)
      .def_property_readonly("v", &nneq::MarketParams::v)
      .def_property_readonly("v_star", &nneq::MarketParams::v_star)
      .def_property_readonly("t", &nneq::MarketParams::t)
      .def_property_readonly("c", &nneq::MarketParams::c)
      .def("coverage_sufficient", &nneq::MarketParams::coverage_sufficient)
      .def("__repr__", [](const nneq::MarketParams& p) {
        std::ostringstream s;
        s << "MarketParams(v=" << p.v() << ", v_star=" << p.v_star()
          << ", t=" << p.t() << ", c=" << p.c() << ")";
        return s.str();
      });

  py::class_<nneq::StrategyProfile>(m, "StrategyProfile")
      .def(py::init([](double p_tilde, double q_N, double q_NN, double p_N,
                       double p_NN) {
             return nneq::StrategyProfile{p_tilde, q_N, q_NN, p_N, p_NN};
           }),
           "p_tilde"_a = 0.0, "q_N"_a = 0.0, "q_NN"_a = 0.0, "p_N"_a = 0.0,
           "p_NN"_a = 0.0)
      .def_readwrite("p_tilde", &nneq::StrategyProfile::p_tilde)
      .def_readwrite("q_N", &nneq::StrategyProfile::q_N)
      .def_readwrite("q_NN", &nneq::StrategyProfile::q_NN)
      .def_readwrite("p_N", &nneq::StrategyProfile::p_N)
      .def_readwrite("p_NN", &nneq::StrategyProfile::p_NN)
      .def_property_readonly("delta_q", &nneq::StrategyProfile::delta_q);

  py::class_<nneq::MarketSplit>(m, "MarketSplit")
      .def_readonly("n_N", &nneq::MarketSplit::n_N)
      .def_readonly("n_NN", &nneq::MarketSplit::n_NN)
      .def_readonly("n_sub_N", &nneq::MarketSplit::n_sub_N)
      .def_readonly("n_sub_NN", &nneq::MarketSplit::n_sub_NN)
      .def_readonly("interior", &nneq::MarketSplit::interior);

  py::class_<nneq::PayoffVector>(m, "PayoffVector")
      .def_readonly("pi_N", &nneq::PayoffVector::pi_N)
      .def_readonly("pi_NN", &nneq::PayoffVector::pi_NN)
      .def_readonly("pi_G", &nneq::PayoffVector::pi_G);

  py::class_<nneq::CoverageFlags>(m, "CoverageFlags")
      .def_readonly("isp_ok", &nneq::CoverageFlags::isp_ok)
      .def_readonly("cp_ok", &nneq::CoverageFlags::cp_ok);

  py::class_<nneq::CpResponse>(m, "CpResponse")
      .def_readonly("branch", &nneq::CpResponse::branch)
      .def_readonly("delta_q_e", &nneq::CpResponse::delta_q_e)
      .def_readonly("q_N_e", &nneq::CpResponse::q_N_e)
      .def_readonly("q_NN_e", &nneq::CpResponse::q_NN_e);

  py::class_<nneq::EquilibriumReport>(m, "EquilibriumReport")
      .def_readonly("params", &nneq::EquilibriumReport::params)
      .def_readonly("fees", &nneq::EquilibriumReport::fees)
      .def_readonly("split", &nneq::EquilibriumReport::split)
      .def_readonly("payoffs", &nneq::EquilibriumReport::payoffs)
      .def_readonly("branch", &nneq::EquilibriumReport::branch)
      .def_readonly("coverage", &nneq::EquilibriumReport::coverage)
      .def_readonly("p_tilde_plateau", &nneq::EquilibriumReport::p_tilde_plateau)
      .def("to_json", &nneq::render_report_json);

  py::class_<nneq::OracleVerdict>(m, "OracleVerdict")
      .def_readonly("target", &nneq::OracleVerdict::target)
      .def_readonly("closed_form_value", &nneq::OracleVerdict::closed_form_value)
      .def_readonly("oracle_value", &nneq::OracleVerdict::oracle_value)
      .def_readonly("discrepancy", &nneq::OracleVerdict::discrepancy)
      .def_readonly("tolerance_used", &nneq::OracleVerdict::tolerance_used)
      .def_readonly("passed", &nneq::OracleVerdict::pass)
      .def_readonly("diagnostics", &nneq::OracleVerdict::diagnostics);

  m.def("indifferent_user",
        [](const nneq::MarketParams& p, const nneq::StrategyProfile& f) {
          const auto point = nneq::indifferent_user(p, f);
          return py::make_tuple(point.x_n, point.interior);
        },
        "params"_a, "fees"_a);
  m.def("payoffs", &nneq::payoffs, "params"_a, "fees"_a, "split"_a);
  m.def("stage3_prices",
        [](const nneq::MarketParams& p, double p_tilde, double q_N, double q_NN) {
          const auto prices = nneq::stage3_prices(p, p_tilde, q_N, q_NN);
          return py::make_tuple(prices.p_N, prices.p_NN);
        },
        "params"_a, "p_tilde"_a, "q_N"_a, "q_NN"_a);
  m.def("stage4_shares_reduced", &nneq::stage4_shares_reduced, "params"_a,
        "p_tilde"_a, "q_N"_a, "q_NN"_a);
  m.def("cp_best_response", &nneq::cp_best_response, "params"_a, "p_tilde"_a);
  m.def("stage1_payoff", &nneq::stage1_payoff, "params"_a, "p_tilde"_a);
  m.def("solve_spe",
        [](const nneq::MarketParams& p, std::optional<double> p_tilde) {
          return nneq::solve_spe(p, policy_from(p_tilde));
        },
        "params"_a, "p_tilde"_a = py::none(),
        "Sub-game perfect equilibrium; p_tilde=None picks the smallest "
        "payoff-maximizing transit fee.");

  m.def("simulate_users",
        [](const nneq::MarketParams& p, const nneq::StrategyProfile& f,
           std::size_t users) { return nneq::simulate_users(p, f, users).split; },
        "params"_a, "fees"_a, "users"_a = 100000);
  m.def("cp_argmax_oracle",
        [](const nneq::MarketParams& p, double p_tilde, std::size_t steps) {
          nneq::GridSpec grid = nneq::default_q_grid(p);
          grid.steps = steps;
          const auto r = nneq::cp_argmax_oracle(p, p_tilde, grid, grid);
          return py::make_tuple(r.q_N, r.q_NN, r.pi_G);
        },
        "params"_a, "p_tilde"_a, "steps"_a = 2001);
  m.def("verify",
        [](const nneq::MarketParams& p, nneq::Stage stage, bool deep,
           std::uint64_t seed, std::size_t probes) {
          nneq::VerifyOptions options;
          options.deep = deep;
          options.seed = seed;
          options.random_probes = probes;
          return nneq::verify(p, stage, options);
        },
        "params"_a, "stage"_a = nneq::Stage::All, "deep"_a = false,
        "seed"_a = 1, "probes"_a = 8);
  m.def("run_cli", &run_cli_captured, "args"_a,
        "Run the nneq command line in-process; returns (exit_code, stdout, "
        "stderr).");
}
