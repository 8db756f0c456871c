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

#include "nneq/equilibrium.h"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nneq/market_model.h"
#include "nneq/oracle.h"
#include "test_support.h"

namespace nneq {
namespace {

constexpr double kTol = 1e-9;

MarketParams Canonical() { return MarketParams(3.5, 2.0, 1.0, 1.0); }

// A few markets with t away from 1 so that t-scaling mistakes show up.
std::array<MarketParams, 4> Markets() {
  return {MarketParams(3.5, 2.0, 1.0, 1.0), MarketParams(2.0, 1.5, 0.5, 0.3),
          MarketParams(7.0, 5.0, 2.0, 0.5), MarketParams(12.0, 9.0, 3.7, 1.1)};
}

// ---------------------------------------------------------------- stage 3

TEST_CASE("Stage3Prices.Canonical") {
  const StagePrices prices = stage3_prices(Canonical(), 1.25, 1.75, 1.5);
  CHECK_NEAR(prices.p_N, 1.5, kTol);
  CHECK_NEAR(prices.p_NN, 1.25, kTol);
}

TEST_CASE("Stage3Prices.NeutralSymmetric") {
  for (const MarketParams& p : Markets()) {
    const StagePrices prices = stage3_prices(p, 0.0, 0.8, 0.8);
    CHECK_NEAR(prices.p_N, p.t() + p.c(), 1e-12);
    CHECK_NEAR(prices.p_NN, p.t() + p.c(), 1e-12);
  }
}

TEST_CASE("Stage3Prices.TransitFeeShiftsPrices") {
  const MarketParams p(3.0, 2.0, 1.0, 0.0);
  const StagePrices prices = stage3_prices(p, 1.0, 0.5, 0.5);
  CHECK_NEAR(prices.p_N, 2.0 / 3.0, kTol);
  CHECK_NEAR(prices.p_NN, 1.0 / 3.0, kTol);
  // Grid best-response iteration lands on the same fixed point.
  GridSpec grid{-1.0, 3.0, 4001};
  const PriceNashResult nash = price_nash_oracle(p, 1.0, 0.5, 0.5, grid);
  CHECK(nash.converged);
  CHECK_NEAR(nash.p_N, 2.0 / 3.0, grid.spacing());
  CHECK_NEAR(nash.p_NN, 1.0 / 3.0, grid.spacing());
}

// ---------------------------------------------------------------- stage 4

TEST_CASE("Stage4Shares.Balanced") {
  for (const MarketParams& p : Markets()) {
    const MarketSplit split = stage4_shares_reduced(p, 0.4, 1.0, 1.4);
    CHECK_NEAR(split.n_N, 0.5, 1e-12);
    CHECK_NEAR(split.n_NN, 0.5, 1e-12);
    CHECK(split.interior);
  }
}

TEST_CASE("Stage4Shares.Canonical") {
  const MarketSplit split = stage4_shares_reduced(Canonical(), 1.25, 1.75, 1.5);
  CHECK_NEAR(split.n_N, 0.25, kTol);
  CHECK_NEAR(split.n_NN, 0.75, kTol);
  CHECK(split.interior);
}

TEST_CASE("Stage4Shares.BoundaryIsNotInterior") {
  // delta_q - p_tilde = -3 with t = 1 puts the raw N share at exactly 0.
  const MarketSplit split = stage4_shares_reduced(Canonical(), 2.0, 1.0, 0.0);
  CHECK_EQ(split.n_N, 0.0);
  CHECK_EQ(split.n_NN, 1.0);
  CHECK_FALSE(split.interior);
}

TEST_CASE("Stage4Shares.MatchFullStage4AtStage3Prices") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const MarketParams p = random_market(rng, uniform(rng, 0.2, 3.0));
    const double p_tilde = uniform(rng, -2.0, 2.0) * p.t();
    const double q_N = uniform(rng, 0.0, 2.0);
    const double q_NN = q_N + uniform(rng, -1.0, 1.0) * p.t();
    const StagePrices prices = stage3_prices(p, p_tilde, q_N, q_NN);
    const StrategyProfile fees{p_tilde, q_N, q_NN, prices.p_N, prices.p_NN};
    const MarketSplit full = split_from_fees(p, fees);
    const MarketSplit reduced = stage4_shares_reduced(p, p_tilde, q_N, q_NN);
    CHECK_NEAR(full.n_N, reduced.n_N, 1e-12);
  }
}

// ---------------------------------------------------------------- stage 2

TEST_CASE("CandidateSets.EliminatedSets") {
  for (const MarketParams& p : Markets()) {
    for (double k : {-3.0, -1.25, -0.5, 0.0, 0.7, 1.25, 3.0}) {
      const double p_tilde = k * p.t();
      const auto sets = candidate_sets(p, p_tilde);
      CHECK_NEAR(sets[0].foc_delta_q, p_tilde - p.t(), 1e-12);
      CHECK_NEAR(sets[3].foc_delta_q, p_tilde + p.t(), 1e-12);
      CHECK(sets[0].eliminated);
      CHECK(sets[3].eliminated);
      CHECK_FALSE(sets[0].interior_delta_q.has_value());
      CHECK_FALSE(sets[3].interior_delta_q.has_value());
      CHECK_FALSE(sets[0].admits(sets[0].foc_delta_q));
      CHECK_FALSE(sets[3].admits(sets[3].foc_delta_q));
      CHECK_FALSE(sets[1].eliminated);
      CHECK_FALSE(sets[2].eliminated);
    }
  }
}

TEST_CASE("CandidateSets.Set2AtNegativeFee") {
  for (const MarketParams& p : Markets()) {
    const double t = p.t();
    const auto sets = candidate_sets(p, -2.0 * t);
    const CandidateSet& set2 = sets[1];
    CHECK_EQ(set2.id, CandidateSetId::Set2);
    CHECK_NEAR(set2.delta_q_lo, -2.0 * t, 1e-12);
    CHECK_NEAR(set2.delta_q_hi, 0.4 * t, 1e-12);
    CHECK_NEAR(set2.foc_delta_q, -0.5 * t, 1e-12);
    REQUIRE(set2.interior_delta_q.has_value());
    CHECK_NEAR(*set2.interior_delta_q, -0.5 * t, 1e-12);
  }
}

TEST_CASE("CandidateSets.Set3AtPositiveFee") {
  for (const MarketParams& p : Markets()) {
    const double t = p.t();
    const auto sets = candidate_sets(p, 2.0 * t);
    const CandidateSet& set3 = sets[2];
    CHECK_EQ(set3.id, CandidateSetId::Set3);
    CHECK_NEAR(set3.delta_q_lo, -0.4 * t, 1e-12);
    CHECK_NEAR(set3.delta_q_hi, 2.0 * t, 1e-12);
    REQUIRE(set3.interior_delta_q.has_value());
    CHECK_NEAR(*set3.interior_delta_q, 0.5 * t, 1e-12);
  }
}

TEST_CASE("CandidateSets.InteriorOnlyOutsideMiddle") {
  const MarketParams p = Canonical();
  // Between the outer breakpoints the stationary points of Sets 2 and 3
  // leave their sets and the optimum sits on the kink.
  for (double p_tilde : {-1.0, -0.3, 0.3, 1.0}) {
    const auto sets = candidate_sets(p, p_tilde);
    CHECK_FALSE(sets[1].interior_delta_q.has_value());
    CHECK_FALSE(sets[2].interior_delta_q.has_value());
  }
}

TEST_CASE("CpBestResponse.Neutral") {
  for (const MarketParams& p : Markets()) {
    const CpResponse r = cp_best_response(p, 0.0);
    const double u = p.v_star() - p.t() / 2.0;
    CHECK_EQ(r.delta_q_e, 0.0);
    CHECK_NEAR(r.q_N_e, u, 1e-12);
    CHECK_NEAR(r.q_NN_e, u, 1e-12);
    CHECK_EQ(r.branch, Branch::B2);
  }
}

TEST_CASE("CpBestResponse.PlateauStart") {
  const CpResponse r = cp_best_response(Canonical(), 1.25);
  CHECK_NEAR(r.delta_q_e, -0.25, kTol);
  CHECK_NEAR(r.q_NN_e, 1.5, kTol);
  CHECK_NEAR(r.q_N_e, 1.75, kTol);
  // Lower-numbered label at the breakpoint; the B4 formula agrees.
  CHECK_EQ(r.branch, Branch::B3);
  const CpResponse b4 = cp_response_on_branch(Canonical(), 1.25, Branch::B4);
  CHECK_NEAR(b4.delta_q_e, r.delta_q_e, 1e-12);
  CHECK_NEAR(b4.q_N_e, r.q_N_e, 1e-12);
}

TEST_CASE("CpBestResponse.NegativeFee") {
  const MarketParams p = Canonical();
  const CpResponse r = cp_best_response(p, -2.0);
  CHECK_EQ(r.branch, Branch::B1);
  CHECK_NEAR(r.delta_q_e, -0.5, kTol);
  CHECK_NEAR(r.q_N_e, p.v_star() - 0.5, kTol);
  CHECK_NEAR(r.q_NN_e, p.v_star() - 1.0, kTol);
}

TEST_CASE("CpBestResponse.GridArgmaxAgrees") {
  const MarketParams p = Canonical();
  const GridSpec grid = default_q_grid(p);
  for (double p_tilde : {-2.0, 1.25}) {
    const CpResponse r = cp_best_response(p, p_tilde);
    const CpArgmaxResult oracle = cp_argmax_oracle(p, p_tilde, grid, grid);
    CHECK_NEAR(oracle.q_N, r.q_N_e, grid.spacing() * (1.0 + 1e-9));
    CHECK_NEAR(oracle.q_NN, r.q_NN_e, grid.spacing() * (1.0 + 1e-9));
  }
}

TEST_CASE("CpBestResponse.BranchLabels") {
  const MarketParams p(7.0, 5.0, 2.0, 0.5);
  const double t = p.t();
  CHECK_EQ(branch_for(p, -3.0 * t), Branch::B1);
  CHECK_EQ(branch_for(p, -1.25 * t), Branch::B1);
  CHECK_EQ(branch_for(p, -t), Branch::B2);
  CHECK_EQ(branch_for(p, 0.0), Branch::B2);
  CHECK_EQ(branch_for(p, 0.5 * t), Branch::B3);
  CHECK_EQ(branch_for(p, 1.25 * t), Branch::B3);
  CHECK_EQ(branch_for(p, 1.3 * t), Branch::B4);
}

// ---------------------------------------------------------------- stage 1

TEST_CASE("Stage1Payoff.Breakpoints") {
  for (const MarketParams& p : Markets()) {
    const double t = p.t();
    CHECK_NEAR(stage1_payoff_on_branch(p, -1.25 * t, Branch::B1), t / 8.0, 1e-12);
    CHECK_NEAR(stage1_payoff_on_branch(p, -1.25 * t, Branch::B2), t / 8.0, 1e-12);
    CHECK_NEAR(stage1_payoff_on_branch(p, 1.25 * t, Branch::B3), 9.0 * t / 8.0,
               1e-12);
    CHECK_NEAR(stage1_payoff_on_branch(p, 1.25 * t, Branch::B4), 9.0 * t / 8.0,
               1e-12);
    CHECK_EQ(plateau_start(p), 1.25 * t);
  }
}

TEST_CASE("Stage1Payoff.MiddleBranchMatchesPipeline") {
  const MarketParams p = Canonical();
  CHECK_NEAR(stage1_payoff(p, 0.0), 0.5, kTol);

  // Through stages 2 to 4 by hand.
  const CpResponse cp = cp_best_response(p, 0.0);
  const StagePrices prices = stage3_prices(p, 0.0, cp.q_N_e, cp.q_NN_e);
  const StrategyProfile fees{0.0, cp.q_N_e, cp.q_NN_e, prices.p_N, prices.p_NN};
  const MarketSplit split = split_from_fees(p, fees);
  CHECK_NEAR(isp_payoffs(p, fees, split).pi_NN, 0.5, kTol);
}

// The middle branch scales with t; a t-free 1/2 + p/5 factor would not
// meet the outer branches when t != 1.
TEST_CASE("Stage1Payoff.MiddleBranchScalesWithT") {
  const MarketParams p(7.0, 5.0, 2.0, 0.5);
  for (double k : {-1.0, -0.5, 0.3, 1.1}) {
    const double p_tilde = k * p.t();
    const double expected =
        (p.t() + 0.4 * p_tilde) * (0.5 + p_tilde / (5.0 * p.t()));
    CHECK_NEAR(stage1_payoff(p, p_tilde), expected, 1e-12);
    CHECK_NEAR(stage1_payoff(p, p_tilde),
               p.t() * stage1_payoff(Canonical(), k), 1e-12);
  }
}

// ---------------------------------------------------------------- solve_spe

TEST_CASE("SolveSpe.Canonical") {
  const EquilibriumReport r = solve_spe(Canonical());
  CHECK_NEAR(r.fees.p_tilde, 1.25, kTol);
  CHECK_NEAR(r.fees.q_N, 1.75, kTol);
  CHECK_NEAR(r.fees.q_NN, 1.5, kTol);
  CHECK_NEAR(r.fees.p_N, 1.5, kTol);
  CHECK_NEAR(r.fees.p_NN, 1.25, kTol);
  CHECK_NEAR(r.split.n_N, 0.25, kTol);
  CHECK_NEAR(r.split.n_NN, 0.75, kTol);
  CHECK_NEAR(r.payoffs.pi_N, 0.125, kTol);
  CHECK_NEAR(r.payoffs.pi_NN, 1.125, kTol);
  CHECK_NEAR(r.payoffs.pi_G, 0.625, kTol);
  CHECK(r.p_tilde_plateau);
  CHECK(r.coverage.isp_ok);
  CHECK(r.coverage.cp_ok);
  CHECK(r.coverage_sufficient);
}

TEST_CASE("SolveSpe.NeutralBaseline") {
  for (const MarketParams& p : Markets()) {
    const EquilibriumReport r = solve_spe(p, GivenTransitFee{0.0});
    const double u = p.v_star() - p.t() / 2.0;
    CHECK_NEAR(r.split.n_N, 0.5, 1e-12);
    CHECK_NEAR(r.split.n_NN, 0.5, 1e-12);
    CHECK_NEAR(r.fees.p_N, p.t() + p.c(), 1e-12);
    CHECK_NEAR(r.fees.p_NN, p.t() + p.c(), 1e-12);
    CHECK_NEAR(r.fees.q_N, u, 1e-12);
    CHECK_NEAR(r.fees.q_NN, u, 1e-12);
    CHECK_FALSE(r.p_tilde_plateau);
  }
}

TEST_CASE("SolveSpe.DeepPlateau") {
  const EquilibriumReport r = solve_spe(Canonical(), GivenTransitFee{10.0});
  CHECK_NEAR(r.payoffs.pi_NN, 1.125, kTol);
  CHECK_NEAR(r.payoffs.pi_G, -8.125, kTol);
  CHECK(r.p_tilde_plateau);
}

TEST_CASE("SolveSpe.RejectsNonFiniteFee") {
  CHECK_THROWS_AS(solve_spe(Canonical(), GivenTransitFee{NAN}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_spe(Canonical(), GivenTransitFee{INFINITY}),
                  std::invalid_argument);
}

TEST_CASE("SolveSpe.FlagsInsufficientValuation") {
  // v < 2t + c still evaluates; the report carries the flag. The bound is
  // only sufficient, so pick v low enough to actually lose users.
  const MarketParams p(1.5, 2.0, 1.0, 1.0);
  const EquilibriumReport r = solve_spe(p);
  CHECK_FALSE(r.coverage_sufficient);
  CHECK_FALSE(r.coverage.isp_ok);
  CHECK(std::isfinite(r.payoffs.pi_NN));
}

// ---------------------------------------------------------------- properties

TEST_CASE("EquilibriumProperties.ContinuityAtBreakpoints") {
  for (const MarketParams& p : Markets()) {
    const double t = p.t();
    const std::array<std::pair<double, std::pair<Branch, Branch>>, 3> joints = {{
        {-1.25 * t, {Branch::B1, Branch::B2}},
        {0.0, {Branch::B2, Branch::B3}},
        {1.25 * t, {Branch::B3, Branch::B4}},
    }};
    for (const auto& [p_tilde, pair] : joints) {
      const CpResponse a = cp_response_on_branch(p, p_tilde, pair.first);
      const CpResponse b = cp_response_on_branch(p, p_tilde, pair.second);
      CHECK_NEAR(a.delta_q_e, b.delta_q_e, 1e-12);
      CHECK_NEAR(a.q_N_e, b.q_N_e, 1e-12);
      CHECK_NEAR(a.q_NN_e, b.q_NN_e, 1e-12);
      CHECK_NEAR(stage1_payoff_on_branch(p, p_tilde, pair.first),
                 stage1_payoff_on_branch(p, p_tilde, pair.second), 1e-12);
    }
  }
}

TEST_CASE("EquilibriumProperties.PlateauInvariance") {
  for (const MarketParams& p : Markets()) {
    for (double k : {1.25, 1.5, 2.0, 4.0, 10.0}) {
      const EquilibriumReport r = solve_spe(p, GivenTransitFee{k * p.t()});
      CHECK_NEAR(r.payoffs.pi_NN, 9.0 * p.t() / 8.0, 1e-9 * (1.0 + k));
      CHECK_NEAR(r.fees.p_N, p.c() + p.t() / 2.0, 1e-12 * (1.0 + k));
      CHECK_NEAR(r.fees.p_NN, 1.5 * p.t() + p.c() - k * p.t(), 1e-9 * (1.0 + k));
    }
  }
}

TEST_CASE("EquilibriumProperties.PlateauTradeOff") {
  for (const MarketParams& p : Markets()) {
    double previous = solve_spe(p, GivenTransitFee{1.25 * p.t()}).payoffs.pi_G;
    for (int i = 1; i <= 20; ++i) {
      const double p_tilde = (1.25 + 0.1 * i) * p.t();
      const double pi_G = solve_spe(p, GivenTransitFee{p_tilde}).payoffs.pi_G;
      CHECK_LT(pi_G, previous);
      CHECK_NEAR(pi_G, p.v_star() - p.t() / 8.0 - p_tilde, 1e-9);
      CHECK_NEAR(pi_G - previous, -0.1 * p.t(), 1e-9);
      previous = pi_G;
    }
  }
}

// Central differences along the binding constraint at every interior
// stationary point of Sets 2 and 3.
TEST_CASE("EquilibriumProperties.FirstOrderConditions") {
  int checked = 0;
  for (const MarketParams& p : Markets()) {
    const double t = p.t();
    const double h = 1e-4 * t;
    for (double k : {-3.0, -2.0, -1.5, 1.5, 2.0, 3.0}) {
      const double p_tilde = k * t;
      for (const CandidateSet& set : candidate_sets(p, p_tilde)) {
        if (!set.interior_delta_q) continue;
        const double dq = *set.interior_delta_q;
        const auto payoff_at = [&](double x) {
          const SubscriptionFees f = candidate_fees(p, set, x);
          return cp_reduced_payoff(p, p_tilde, f.q_N, f.q_NN);
        };
        const double slope = (payoff_at(dq + h) - payoff_at(dq - h)) / (2.0 * h);
        INFO("t = ", t, ", p_tilde = ", p_tilde);
        CHECK_NEAR(slope, 0.0, 1e-6);
        ++checked;
      }
    }
  }
  CHECK_EQ(checked, 24);
}

TEST_CASE("EquilibriumProperties.ReportIsInternallyConsistent") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 200; ++k) {
    const MarketParams p = random_market(rng, uniform(rng, 0.2, 3.0));
    const EquilibriumReport r =
        solve_spe(p, GivenTransitFee{uniform(rng, -3.0, 3.0) * p.t()});
    const MarketSplit split = split_from_fees(p, r.fees);
    const PayoffVector pay = payoffs(p, r.fees, split);
    CHECK_EQ(split.n_N, r.split.n_N);
    CHECK_EQ(split.n_NN, r.split.n_NN);
    CHECK_EQ(pay.pi_N, r.payoffs.pi_N);
    CHECK_EQ(pay.pi_NN, r.payoffs.pi_NN);
    CHECK_EQ(pay.pi_G, r.payoffs.pi_G);
    CHECK_EQ(r.fees.delta_q(), r.fees.q_NN - r.fees.q_N);
    CHECK_NEAR(r.fees.delta_q(), r.branch.delta_q_e, 1e-12);
  }
}

}  // namespace
}  // namespace nneq
