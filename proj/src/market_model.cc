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

#include "nneq/market_model.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nneq {
namespace {

// Slack for the analytic coverage comparisons; the equilibrium makes the
// marginal subscriber exactly indifferent.
constexpr double kCoverageSlack = 1e-12;

void check_location(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("user location must lie in [0, 1], got " +
                                std::to_string(x));
  }
}

double distance_to(Isp isp, double x) { return isp == Isp::N ? x : 1.0 - x; }

// Best payoff of a user at x who joined `isp`: access, plus content when it
// does not hurt.
double best_participation_payoff(const MarketParams& params, Isp isp, double x,
                                 const StrategyProfile& fees) {
  return user_utility_internet(params, isp, x, fees) +
         std::max(0.0, user_utility_content(params, isp, x, fees));
}

// Minimum over [lo, hi] of the piecewise-linear best payoff. Kinks sit at
// x = 1/2 and where the content utility crosses zero.
double min_payoff_on(const MarketParams& params, Isp isp, double lo, double hi,
                     const StrategyProfile& fees) {
  const double r =
      (params.v_star() - fees.subscription_fee(isp)) / params.t();
  const std::array<double, 5> candidates = {lo, hi, 0.5, r, 1.0 - r};
  double worst = best_participation_payoff(params, isp, lo, fees);
  for (double x : candidates) {
    if (x < lo || x > hi) continue;
    worst = std::min(worst, best_participation_payoff(params, isp, x, fees));
  }
  return worst;
}

}  // namespace

std::string_view to_string(Isp isp) { return isp == Isp::N ? "N" : "NN"; }

std::string_view to_string(CoverageRegime regime) {
  return regime == CoverageRegime::DeltaQGeqPtilde ? "DeltaQGeqPtilde"
                                                   : "DeltaQLeqPtilde";
}

MarketParams::MarketParams(double v, double v_star, double t, double c)
    : v_(v), v_star_(v_star), t_(t), c_(c) {
  if (!std::isfinite(v) || !std::isfinite(v_star) || !std::isfinite(t) ||
      !std::isfinite(c)) {
    throw std::invalid_argument("market parameters must be finite");
  }
  if (!(t > 0.0)) {
    throw std::invalid_argument("transport cost t must be positive, got " +
                                std::to_string(t));
  }
  if (c < 0.0) {
    throw std::invalid_argument("connection cost c must be non-negative, got " +
                                std::to_string(c));
  }
}

bool StrategyProfile::is_finite() const {
  return std::isfinite(p_tilde) && std::isfinite(q_N) && std::isfinite(q_NN) &&
         std::isfinite(p_N) && std::isfinite(p_NN);
}

double user_utility_internet(const MarketParams& params, Isp isp, double x,
                             const StrategyProfile& fees) {
  check_location(x);
  return params.v() - params.t() * distance_to(isp, x) -
         fees.connection_fee(isp);
}

double user_utility_content(const MarketParams& params, Isp isp, double x,
                            const StrategyProfile& fees) {
  check_location(x);
  return params.v_star() - params.t() * std::min(x, 1.0 - x) -
         fees.subscription_fee(isp);
}

double user_total_utility(const MarketParams& params, Isp isp, double x,
                          const StrategyProfile& fees, bool buys_content) {
  const double access = user_utility_internet(params, isp, x, fees);
  return buys_content ? access + user_utility_content(params, isp, x, fees)
                      : access;
}

IspPayoffs isp_payoffs(const MarketParams& params, const StrategyProfile& fees,
                       const MarketSplit& split) {
  return {
      .pi_N = (fees.p_N - params.c()) * split.n_N,
      .pi_NN = (fees.p_NN - params.c()) * split.n_NN +
               fees.p_tilde * split.n_sub_NN,
  };
}

double cp_payoff(const StrategyProfile& fees, const MarketSplit& split) {
  return (fees.q_NN - fees.p_tilde) * split.n_sub_NN + fees.q_N * split.n_sub_N;
}

PayoffVector payoffs(const MarketParams& params, const StrategyProfile& fees,
                     const MarketSplit& split) {
  const IspPayoffs isp = isp_payoffs(params, fees, split);
  return {.pi_N = isp.pi_N, .pi_NN = isp.pi_NN, .pi_G = cp_payoff(fees, split)};
}

IndifferentPoint indifferent_user(const MarketParams& params,
                                  const StrategyProfile& fees) {
  const double x_n =
      0.5 + (fees.p_NN - fees.p_N + fees.q_NN - fees.q_N) / (2.0 * params.t());
  return {.x_n = x_n, .interior = x_n >= 0.0 && x_n <= 1.0};
}

MarketSplit split_from_indifference(const IndifferentPoint& point) {
  const double n_N = std::clamp(point.x_n, 0.0, 1.0);
  const double n_NN = 1.0 - n_N;
  return {.n_N = n_N,
          .n_NN = n_NN,
          .n_sub_N = n_N,
          .n_sub_NN = n_NN,
          .interior = point.interior};
}

MarketSplit split_from_fees(const MarketParams& params,
                            const StrategyProfile& fees) {
  return split_from_indifference(indifferent_user(params, fees));
}

CoverageBounds coverage_bounds(const MarketParams& params, double p_tilde,
                               double delta_q) {
  const double anchor = params.v_star() - params.t() / 2.0;
  const double shift = (delta_q - p_tilde) / 6.0;
  return {
      .u_qN = anchor,
      .u_qNN = anchor + shift,
      .u_prime_qN = anchor - shift,
      .u_prime_qNN = anchor,
      .regime = delta_q >= p_tilde ? CoverageRegime::DeltaQGeqPtilde
                                   : CoverageRegime::DeltaQLeqPtilde,
  };
}

double farthest_subscriber(const MarketParams& params, Isp isp, double q) {
  if (isp == Isp::N) return (params.v_star() - q) / params.t();
  return (params.t() + q - params.v_star()) / params.t();
}

CoverageFlags check_full_coverage(const MarketParams& params,
                                  const StrategyProfile& fees,
                                  const MarketSplit& split) {
  // N serves [0, n_N], NN serves [1 - n_NN, 1]. Anything in between opted out.
  const double n_N_end = std::clamp(split.n_N, 0.0, 1.0);
  const double n_NN_start = std::clamp(1.0 - split.n_NN, 0.0, 1.0);

  bool isp_ok = split.n_N + split.n_NN >= 1.0 - kCoverageSlack;
  bool cp_ok = true;
  if (split.n_N > 0.0) {
    isp_ok = isp_ok &&
             min_payoff_on(params, Isp::N, 0.0, n_N_end, fees) >= -kCoverageSlack;
    // The N user closest to the middle is the least keen on content.
    const double x_hat = farthest_subscriber(params, Isp::N, fees.q_N);
    cp_ok = cp_ok && x_hat >= std::min(n_N_end, 0.5) - kCoverageSlack;
  }
  if (split.n_NN > 0.0) {
    isp_ok = isp_ok && min_payoff_on(params, Isp::NN, n_NN_start, 1.0, fees) >=
                           -kCoverageSlack;
    const double x_hat = farthest_subscriber(params, Isp::NN, fees.q_NN);
    cp_ok = cp_ok && x_hat <= std::max(n_NN_start, 0.5) + kCoverageSlack;
  }
  return {.isp_ok = isp_ok, .cp_ok = cp_ok};
}

}  // namespace nneq
