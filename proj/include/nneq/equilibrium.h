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

#ifndef NNEQ_EQUILIBRIUM_H_
#define NNEQ_EQUILIBRIUM_H_

#include <array>
#include <optional>
#include <string_view>
#include <variant>

#include "nneq/market_model.h"

// Closed-form backward induction of the four-stage game:
//   1. ISP NN announces the transit fee p_tilde.
//   2. The CP sets q_N and q_NN, keeping every connected user subscribed.
//   3. The ISPs set p_N and p_NN simultaneously.
//   4. Users pick an ISP (and the content).
namespace nneq {

struct StagePrices {
  double p_N = 0.0;
  double p_NN = 0.0;
};

// Stage-3 price equilibrium given the transit and subscription fees:
//   p_NN = t + c - dq/3 - 2 p_tilde/3,   p_N = t + c + dq/3 - p_tilde/3.
StagePrices stage3_prices(const MarketParams& params, double p_tilde, double q_N,
                          double q_NN);

// Stage-4 shares after substituting the stage-3 prices:
//   n_N = 1/2 + (dq - p_tilde) / (6t).
// Shares are clamped into [0, 1] with n_sub == n. `interior` is false when the
// raw n_N is not strictly inside (0, 1), where one ISP loses its whole market
// and the stage-3 first-order conditions stop describing the outcome.
MarketSplit stage4_shares_reduced(const MarketParams& params, double p_tilde,
                                  double q_N, double q_NN);

enum class CandidateSetId { Set1, Set2, Set3, Set4 };

// Which subscription fee sits on which coverage bound.
enum class BindingFee { qNN_at_u, qN_at_u, qNN_at_uprime, qN_at_uprime };

std::string_view to_string(CandidateSetId id);
std::string_view to_string(BindingFee binding);

// One of the four regimes of the CP's constrained problem. In each, one fee
// is pinned to its coverage bound so the payoff becomes a concave function of
// delta_q alone, restricted to an interval [delta_q_lo, delta_q_hi] (possibly
// empty or unbounded).
struct CandidateSet {
  CandidateSetId id = CandidateSetId::Set1;
  BindingFee binding = BindingFee::qNN_at_u;
  double p_tilde = 0.0;
  double delta_q_lo = 0.0;
  double delta_q_hi = 0.0;
  // Stationary point of the payoff along the binding constraint.
  double foc_delta_q = 0.0;
  // foc_delta_q when it satisfies the set's own condition, otherwise empty.
  std::optional<double> interior_delta_q;
  // True for Sets 1 and 4: their stationary point violates their condition
  // for every p_tilde.
  bool eliminated = false;

  bool empty() const { return delta_q_lo > delta_q_hi; }

  // The set's condition on (p_tilde, delta_q).
  bool admits(double delta_q) const {
    return delta_q >= delta_q_lo && delta_q <= delta_q_hi;
  }
};

// Fees (q_N, q_NN) of `set` at a given delta_q, with the binding fee on its
// bound.
struct SubscriptionFees {
  double q_N = 0.0;
  double q_NN = 0.0;
};

SubscriptionFees candidate_fees(const MarketParams& params,
                                const CandidateSet& set, double delta_q);

// CP payoff with stage-3/4 outcomes substituted in.
double cp_reduced_payoff(const MarketParams& params, double p_tilde, double q_N,
                         double q_NN);

std::array<CandidateSet, 4> candidate_sets(const MarketParams& params,
                                           double p_tilde);

// Branches of the CP's optimal response, by p_tilde interval:
//   B1: p_tilde <= -5t/4   B2: [-5t/4, 0]   B3: [0, 5t/4]   B4: >= 5t/4.
enum class Branch { B1, B2, B3, B4 };

std::string_view to_string(Branch branch);

struct CpResponse {
  Branch branch = Branch::B2;
  double delta_q_e = 0.0;
  double q_N_e = 0.0;
  double q_NN_e = 0.0;
};

// Branch formulas evaluated at p_tilde without checking that p_tilde lies in
// the branch's interval. Used to compare adjacent branches at breakpoints.
CpResponse cp_response_on_branch(const MarketParams& params,
                                     double p_tilde, Branch branch);

Branch branch_for(const MarketParams& params, double p_tilde);

// CP's optimal subscription fees. At a breakpoint the lower-numbered branch
// label is reported; the adjacent branches agree there.
CpResponse cp_best_response(const MarketParams& params, double p_tilde);

// ISP NN's payoff anticipating stages 2-4:
//   t/8                                 p_tilde <= -5t/4
//   (t + 2 p_tilde/5)(1/2 + p_tilde/(5t))  in between
//   9t/8                                p_tilde >= 5t/4
double stage1_payoff(const MarketParams& params, double p_tilde);

// One piece of stage1_payoff evaluated regardless of its interval. B2 and B3
// share the middle piece.
double stage1_payoff_on_branch(const MarketParams& params, double p_tilde,
                               Branch branch);

// Left end of the transit fees that maximize ISP NN's payoff.
double plateau_start(const MarketParams& params);

struct MinimalPlateau {};
struct GivenTransitFee {
  double value = 0.0;
};
using TransitFeePolicy = std::variant<MinimalPlateau, GivenTransitFee>;

struct EquilibriumReport {
  MarketParams params;
  StrategyProfile fees;
  MarketSplit split;
  PayoffVector payoffs;
  CpResponse branch;
  CoverageFlags coverage;
  bool p_tilde_plateau = false;
  // Copied from params for convenience; false means v < 2t + c.
  bool coverage_sufficient = false;
};

// Sub-game perfect equilibrium. Coverage violations and non-interior splits
// are flagged in the report, not thrown. Throws std::invalid_argument for a
// non-finite given p_tilde.
EquilibriumReport solve_spe(const MarketParams& params,
                            const TransitFeePolicy& policy = MinimalPlateau{});

}  // namespace nneq

#endif  // NNEQ_EQUILIBRIUM_H_
