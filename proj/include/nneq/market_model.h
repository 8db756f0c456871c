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

#ifndef NNEQ_MARKET_MODEL_H_
#define NNEQ_MARKET_MODEL_H_

#include <string_view>

// Primitive types and payoff arithmetic of the two-ISP / one-CP hotelling
// market. ISP N (neutral) sits at x = 0 and ISP NN (non-neutral) at x = 1;
// users are uniform on [0, 1]. Nothing in here knows about equilibria.
namespace nneq {

enum class Isp { N, NN };

std::string_view to_string(Isp isp);

// Constants of one market instance.
//   v       valuation of Internet access
//   v_star  valuation of the CP's content
//   t       marginal transport cost, strictly positive
//   c       per-connection cost of an ISP, non-negative
// Construction throws std::invalid_argument on non-finite values, t <= 0 or
// c < 0.
class MarketParams {
 public:
  MarketParams(double v, double v_star, double t, double c);

  double v() const { return v_; }
  double v_star() const { return v_star_; }
  double t() const { return t_; }
  double c() const { return c_; }

  // v >= 2t + c guarantees every user buys access at the equilibrium.
  bool coverage_sufficient() const { return v_ >= 2.0 * t_ + c_; }

  friend bool operator==(const MarketParams&, const MarketParams&) = default;

 private:
  double v_;
  double v_star_;
  double t_;
  double c_;
};

// All five fees. Negative values are subsidies and are legal.
struct StrategyProfile {
  double p_tilde = 0.0;  // per-subscriber fee the CP pays ISP NN
  double q_N = 0.0;      // CP subscription fee for ISP N's users
  double q_NN = 0.0;     // CP subscription fee for ISP NN's users
  double p_N = 0.0;      // ISP N connection fee
  double p_NN = 0.0;     // ISP NN connection fee

  double delta_q() const { return q_NN - q_N; }
  double connection_fee(Isp isp) const { return isp == Isp::N ? p_N : p_NN; }
  double subscription_fee(Isp isp) const {
    return isp == Isp::N ? q_N : q_NN;
  }
  bool is_finite() const;

  friend bool operator==(const StrategyProfile&,
                         const StrategyProfile&) = default;
};

// Fractions of the user population. Under full ISP coverage
// n_N + n_NN == 1; n_sub_* count the users of each ISP that also subscribe
// to the CP.
struct MarketSplit {
  double n_N = 0.0;
  double n_NN = 0.0;
  double n_sub_N = 0.0;
  double n_sub_NN = 0.0;
  bool interior = true;

  friend bool operator==(const MarketSplit&, const MarketSplit&) = default;
};

struct PayoffVector {
  double pi_N = 0.0;
  double pi_NN = 0.0;
  double pi_G = 0.0;

  friend bool operator==(const PayoffVector&, const PayoffVector&) = default;
};

struct IspPayoffs {
  double pi_N = 0.0;
  double pi_NN = 0.0;
};

enum class CoverageRegime { DeltaQGeqPtilde, DeltaQLeqPtilde };

std::string_view to_string(CoverageRegime regime);

// Upper bounds on the subscription fees that keep every connected user
// subscribed. The unprimed pair applies when delta_q >= p_tilde (ISP N holds
// at least half the market), the primed pair when delta_q <= p_tilde.
struct CoverageBounds {
  double u_qN = 0.0;
  double u_qNN = 0.0;
  double u_prime_qN = 0.0;
  double u_prime_qNN = 0.0;
  CoverageRegime regime = CoverageRegime::DeltaQGeqPtilde;

  // Bounds of the active regime.
  double active_bound_qN() const {
    return regime == CoverageRegime::DeltaQGeqPtilde ? u_qN : u_prime_qN;
  }
  double active_bound_qNN() const {
    return regime == CoverageRegime::DeltaQGeqPtilde ? u_qNN : u_prime_qNN;
  }
};

struct IndifferentPoint {
  double x_n = 0.5;  // unclamped
  bool interior = true;
};

struct CoverageFlags {
  bool isp_ok = false;
  bool cp_ok = false;

  friend bool operator==(const CoverageFlags&, const CoverageFlags&) = default;
};

// v - t*dist - p_j, with dist = x for N and 1 - x for NN.
double user_utility_internet(const MarketParams& params, Isp isp, double x,
                             const StrategyProfile& fees);

// v* - t*min(x, 1-x) - q_j. The distance term is the same for both ISPs.
double user_utility_content(const MarketParams& params, Isp isp, double x,
                            const StrategyProfile& fees);

// Internet part plus, if buys_content, the content part. Opting out (payoff
// 0) is the caller's baseline.
double user_total_utility(const MarketParams& params, Isp isp, double x,
                          const StrategyProfile& fees, bool buys_content);

IspPayoffs isp_payoffs(const MarketParams& params, const StrategyProfile& fees,
                       const MarketSplit& split);

double cp_payoff(const StrategyProfile& fees, const MarketSplit& split);

PayoffVector payoffs(const MarketParams& params, const StrategyProfile& fees,
                     const MarketSplit& split);

// Location of the user indifferent between the two ISPs when everybody buys
// content: 1/2 + (p_NN - p_N + q_NN - q_N) / (2t). Not clamped.
IndifferentPoint indifferent_user(const MarketParams& params,
                                  const StrategyProfile& fees);

// Clamps the indifferent point into a full-coverage split with every
// connected user subscribed (n_sub == n).
MarketSplit split_from_indifference(const IndifferentPoint& point);

MarketSplit split_from_fees(const MarketParams& params,
                            const StrategyProfile& fees);

CoverageBounds coverage_bounds(const MarketParams& params, double p_tilde,
                               double delta_q);

// x_hat_N = (v* - q) / t for N; x_hat_NN = (t + q - v*) / t for NN.
double farthest_subscriber(const MarketParams& params, Isp isp, double q);

// Analytic check of full ISP and CP coverage for the users as allocated by
// `split` (N serves [0, n_N], NN serves [n_N, 1]). isp_ok requires every
// user's best payoff at her ISP (access, plus content when it is worth
// buying) to be non-negative. cp_ok requires u_{j,G}(x) >= 0 for every user
// at her ISP.
CoverageFlags check_full_coverage(const MarketParams& params,
                                  const StrategyProfile& fees,
                                  const MarketSplit& split);

}  // namespace nneq

#endif  // NNEQ_MARKET_MODEL_H_
