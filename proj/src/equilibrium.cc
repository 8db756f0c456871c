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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nneq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Both q fees are anchored here whenever they sit on the bound that does not
// move with delta_q.
double anchor_fee(const MarketParams& params) {
  return params.v_star() - params.t() / 2.0;
}

// -p_tilde / 5 without producing a negative zero at p_tilde == 0.
double mid_delta_q(double p_tilde) { return -p_tilde / 5.0 + 0.0; }

}  // namespace

std::string_view to_string(CandidateSetId id) {
  switch (id) {
    case CandidateSetId::Set1: return "Set1";
    case CandidateSetId::Set2: return "Set2";
    case CandidateSetId::Set3: return "Set3";
    case CandidateSetId::Set4: return "Set4";
  }
  return "?";
}

std::string_view to_string(BindingFee binding) {
  switch (binding) {
    case BindingFee::qNN_at_u: return "qNN_at_u";
    case BindingFee::qN_at_u: return "qN_at_u";
    case BindingFee::qNN_at_uprime: return "qNN_at_uprime";
    case BindingFee::qN_at_uprime: return "qN_at_uprime";
  }
  return "?";
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::B1: return "B1";
    case Branch::B2: return "B2";
    case Branch::B3: return "B3";
    case Branch::B4: return "B4";
  }
  return "?";
}

StagePrices stage3_prices(const MarketParams& params, double p_tilde, double q_N,
                          double q_NN) {
  const double base = params.t() + params.c();
  const double delta_q = q_NN - q_N;
  return {
      .p_N = base + delta_q / 3.0 - p_tilde / 3.0,
      .p_NN = base - delta_q / 3.0 - 2.0 * p_tilde / 3.0,
  };
}

MarketSplit stage4_shares_reduced(const MarketParams& params, double p_tilde,
                                  double q_N, double q_NN) {
  const double raw = 0.5 + ((q_NN - q_N) - p_tilde) / (6.0 * params.t());
  const double n_N = std::clamp(raw, 0.0, 1.0);
  const double n_NN = 1.0 - n_N;
  return {.n_N = n_N,
          .n_NN = n_NN,
          .n_sub_N = n_N,
          .n_sub_NN = n_NN,
          .interior = raw > 0.0 && raw < 1.0};
}

double cp_reduced_payoff(const MarketParams& params, double p_tilde, double q_N,
                         double q_NN) {
  const StrategyProfile fees{.p_tilde = p_tilde, .q_N = q_N, .q_NN = q_NN};
  return cp_payoff(fees, stage4_shares_reduced(params, p_tilde, q_N, q_NN));
}

SubscriptionFees candidate_fees(const MarketParams& params,
                                const CandidateSet& set, double delta_q) {
  const CoverageBounds bounds = coverage_bounds(params, set.p_tilde, delta_q);
  switch (set.binding) {
    case BindingFee::qNN_at_u:
      return {.q_N = bounds.u_qNN - delta_q, .q_NN = bounds.u_qNN};
    case BindingFee::qN_at_u:
      return {.q_N = bounds.u_qN, .q_NN = bounds.u_qN + delta_q};
    case BindingFee::qNN_at_uprime:
      return {.q_N = bounds.u_prime_qNN - delta_q, .q_NN = bounds.u_prime_qNN};
    case BindingFee::qN_at_uprime:
      return {.q_N = bounds.u_prime_qN, .q_NN = bounds.u_prime_qN + delta_q};
  }
  return {};
}

std::array<CandidateSet, 4> candidate_sets(const MarketParams& params,
                                           double p_tilde) {
  const double t = params.t();
  const double mid = mid_delta_q(p_tilde);

  // Conditions on delta_q, rewritten from the constraint on p_tilde:
  //   Set1: -5dq <= p <= dq    Set2: p <= min(dq, -5dq)
  //   Set3: p >= max(dq, -5dq) Set4: dq <= p <= -5dq
  std::array<CandidateSet, 4> sets = {
      CandidateSet{.id = CandidateSetId::Set1,
                   .binding = BindingFee::qNN_at_u,
                   .delta_q_lo = std::max(p_tilde, mid),
                   .delta_q_hi = kInf,
                   .foc_delta_q = p_tilde - t},
      CandidateSet{.id = CandidateSetId::Set2,
                   .binding = BindingFee::qN_at_u,
                   .delta_q_lo = p_tilde,
                   .delta_q_hi = mid,
                   .foc_delta_q = p_tilde + 1.5 * t},
      CandidateSet{.id = CandidateSetId::Set3,
                   .binding = BindingFee::qNN_at_uprime,
                   .delta_q_lo = mid,
                   .delta_q_hi = p_tilde,
                   .foc_delta_q = p_tilde - 1.5 * t},
      CandidateSet{.id = CandidateSetId::Set4,
                   .binding = BindingFee::qN_at_uprime,
                   .delta_q_lo = -kInf,
                   .delta_q_hi = std::min(p_tilde, mid),
                   .foc_delta_q = p_tilde + t},
  };
  for (CandidateSet& set : sets) {
    set.p_tilde = p_tilde;
    if (set.admits(set.foc_delta_q)) set.interior_delta_q = set.foc_delta_q;
  }
  // Set1's stationary point lies below p_tilde and Set4's above it, so
  // neither can satisfy its own condition.
  sets[0].eliminated = true;
  sets[3].eliminated = true;
  return sets;
}

Branch branch_for(const MarketParams& params, double p_tilde) {
  const double edge = 1.25 * params.t();
  if (p_tilde <= -edge) return Branch::B1;
  if (p_tilde <= 0.0) return Branch::B2;
  if (p_tilde <= edge) return Branch::B3;
  return Branch::B4;
}

CpResponse cp_response_on_branch(const MarketParams& params,
                                     double p_tilde, Branch branch) {
  const double t = params.t();
  const double anchor = anchor_fee(params);
  CpResponse out{.branch = branch};
  switch (branch) {
    case Branch::B1:
      out.delta_q_e = p_tilde + 1.5 * t;
      break;
    case Branch::B2:
    case Branch::B3:
      out.delta_q_e = mid_delta_q(p_tilde);
      break;
    case Branch::B4:
      out.delta_q_e = p_tilde - 1.5 * t;
      break;
  }
  // Below p_tilde = 0 the N-side fee is pinned, above it the NN-side fee.
  if (branch == Branch::B1 || branch == Branch::B2) {
    out.q_N_e = anchor;
    out.q_NN_e = anchor + out.delta_q_e;
  } else {
    out.q_NN_e = anchor;
    out.q_N_e = anchor - out.delta_q_e;
  }
  return out;
}

CpResponse cp_best_response(const MarketParams& params, double p_tilde) {
  return cp_response_on_branch(params, p_tilde, branch_for(params, p_tilde));
}

double stage1_payoff_on_branch(const MarketParams& params, double p_tilde,
                               Branch branch) {
  const double t = params.t();
  switch (branch) {
    case Branch::B1:
      return t / 8.0;
    case Branch::B2:
    case Branch::B3:
      return (t + 2.0 * p_tilde / 5.0) * (0.5 + p_tilde / (5.0 * t));
    case Branch::B4:
      return 9.0 * t / 8.0;
  }
  return 0.0;
}

double stage1_payoff(const MarketParams& params, double p_tilde) {
  return stage1_payoff_on_branch(params, p_tilde, branch_for(params, p_tilde));
}

double plateau_start(const MarketParams& params) { return 1.25 * params.t(); }

EquilibriumReport solve_spe(const MarketParams& params,
                            const TransitFeePolicy& policy) {
  double p_tilde = plateau_start(params);
  if (const auto* given = std::get_if<GivenTransitFee>(&policy)) {
    if (!std::isfinite(given->value)) {
      throw std::invalid_argument("transit fee must be finite");
    }
    p_tilde = given->value;
  }

  const CpResponse response = cp_best_response(params, p_tilde);
  const StagePrices prices =
      stage3_prices(params, p_tilde, response.q_N_e, response.q_NN_e);
  const StrategyProfile fees{.p_tilde = p_tilde,
                             .q_N = response.q_N_e,
                             .q_NN = response.q_NN_e,
                             .p_N = prices.p_N,
                             .p_NN = prices.p_NN};
  const MarketSplit split = split_from_fees(params, fees);

  return EquilibriumReport{
      .params = params,
      .fees = fees,
      .split = split,
      .payoffs = payoffs(params, fees, split),
      .branch = response,
      .coverage = check_full_coverage(params, fees, split),
      .p_tilde_plateau = p_tilde >= plateau_start(params),
      .coverage_sufficient = params.coverage_sufficient(),
  };
}

}  // namespace nneq
