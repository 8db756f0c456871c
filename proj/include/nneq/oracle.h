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

#ifndef NNEQ_ORACLE_H_
#define NNEQ_ORACLE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nneq/equilibrium.h"
#include "nneq/market_model.h"

// Brute-force verifiers for the closed forms in equilibrium.h. They work by
// enumeration only (user populations, grid scans, best-response iteration)
// and never call the stage-3 or stage-2 closed forms they are checking.
namespace nneq {

// Evenly spaced points lo, ..., hi.
struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t steps = 2;

  // Throws std::invalid_argument unless lo < hi, both finite, steps >= 2.
  void validate() const;
  double spacing() const { return (hi - lo) / static_cast<double>(steps - 1); }
  // Exact at both ends.
  double at(std::size_t i) const {
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(steps - 1);
  }
  // Grid with the spacing halved and every old point kept.
  GridSpec refined() const { return {lo, hi, 2 * steps - 1}; }
};

// [v* - t/2 - 3t, v* - t/2 + t], 2001 points.
GridSpec default_q_grid(const MarketParams& params);
// [c - t, c + 3t], 2001 points.
GridSpec default_price_grid(const MarketParams& params);
// [-2t, 2t], 401 points.
GridSpec default_transit_grid(const MarketParams& params);

enum class OracleErrorKind { NonConvergence, GridTooNarrow, EmptyFeasibleSet };

std::string_view to_string(OracleErrorKind kind);

class OracleError : public std::runtime_error {
 public:
  OracleError(OracleErrorKind kind, const std::string& what);
  OracleErrorKind kind() const { return kind_; }

 private:
  OracleErrorKind kind_;
};

struct OracleVerdict {
  std::string target;
  std::vector<double> closed_form_value;
  std::vector<double> oracle_value;
  double discrepancy = 0.0;
  double tolerance_used = 0.0;
  bool pass = false;
  std::string diagnostics;

  friend bool operator==(const OracleVerdict&, const OracleVerdict&) = default;
};

// Builds a verdict with discrepancy = max |closed - oracle| per coordinate.
OracleVerdict make_verdict(std::string target, std::vector<double> closed_form,
                           std::vector<double> oracle, double tolerance,
                           std::string diagnostics = {});

// ---------------------------------------------------------------- stage 4

struct SimulatedMarket {
  MarketSplit split;
  std::size_t users = 0;
  std::size_t opted_out = 0;
  std::string diagnostic;
};

// m users at x_i = (i + 1/2)/m, each taking the best of {N + content,
// N only, NN + content, NN only, out}. Ties go to the earlier option in that
// list. `split.interior` is true iff everybody participates and both ISPs
// have users. Throws std::invalid_argument if m < 2.
SimulatedMarket simulate_users(const MarketParams& params,
                               const StrategyProfile& fees, std::size_t m);

// Exact shares of the continuum under the same choice rule, allowing partial
// participation and partial content coverage. Every payoff is linear between
// the kinks {1/2, content-utility roots}, so each piece is solved exactly.
MarketSplit participation_shares(const MarketParams& params,
                                 const StrategyProfile& fees);

// ---------------------------------------------------------------- stage 3

struct PriceNashResult {
  double p_N = 0.0;
  double p_NN = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Alternating best responses on `grid`, starting from the grid point nearest
// t + c. Payoffs use the clamped indifferent-user split with every user
// subscribed. Converged when a full round leaves both prices unchanged;
// otherwise the last iterate is returned with converged == false. Throws
// OracleError(GridTooNarrow) when a best response lands on a grid end.
PriceNashResult price_nash_oracle(const MarketParams& params, double p_tilde,
                                  double q_N, double q_NN,
                                  const GridSpec& grid, int max_iters = 100);

enum class SplitModel { Analytic, Simulated };

struct DeviationGain {
  double gain_N = 0.0;   // best unilateral improvement for ISP N
  double gain_NN = 0.0;  // likewise for ISP NN
  double tolerance = 0.0;  // noise floor of the split model used
};

// Largest payoff gain either ISP obtains by moving its price to another grid
// point while the rival keeps its price in `fees`. With `window` > 0 only
// the `window` grid points on each side of the current price are tried.
// Simulated mode uses `users` discrete users per evaluation.
DeviationGain max_deviation_gain(const MarketParams& params,
                                 const StrategyProfile& fees,
                                 const GridSpec& grid, SplitModel model,
                                 std::size_t window = 0,
                                 std::size_t users = 100000);

// ---------------------------------------------------------------- stage 2

struct CpArgmaxResult {
  double q_N = 0.0;
  double q_NN = 0.0;
  double pi_G = 0.0;
  std::size_t feasible_points = 0;
  // Best feasible payoff among points strictly inside the conditions of
  // candidate sets 1 and 4; empty if no grid point falls there.
  std::optional<double> best_in_set1;
  std::optional<double> best_in_set4;
};

// Exhaustive scan of (q_N, q_NN) pairs keeping every connected user
// subscribed, with the CP payoff evaluated on the reduced stage-4 shares.
// Ties resolve to the lowest (q_N, q_NN) index. Deterministic for any `jobs`.
// Throws OracleError(EmptyFeasibleSet) or OracleError(GridTooNarrow) when the
// argmax touches a grid end.
CpArgmaxResult cp_argmax_oracle(const MarketParams& params, double p_tilde,
                                const GridSpec& grid_qN,
                                const GridSpec& grid_qNN, unsigned jobs = 1);

// True iff q_N or q_NN of `result` lies within `spacing` of its active
// coverage bound.
bool binding_fee_check(const CpArgmaxResult& result, const CoverageBounds& bounds,
                  double spacing);

// ---------------------------------------------------------------- stage 1

enum class OracleDepth { Fast, Deep };

struct TransitArgmaxResult {
  double p_tilde = 0.0;  // first grid point attaining the maximum
  double pi_NN = 0.0;
  std::vector<double> grid_p_tilde;
  std::vector<double> pi_NN_values;
  std::vector<double> argmax_set;  // grid points within tolerance of the max
};

// Scans p_tilde over `grid`. For each point the CP response comes from
// cp_best_response (Fast) or cp_argmax_oracle on the default q grids (Deep);
// the ISPs play stage-3 prices, the split follows from the indifferent user,
// and pi_NN is evaluated from the ISP payoff definition. Throws
// OracleError(GridTooNarrow) if the grid stops short of 5t/4.
TransitArgmaxResult transit_fee_argmax_oracle(const MarketParams& params,
                                              const GridSpec& grid,
                                              OracleDepth depth,
                                              double plateau_tolerance = 1e-9,
                                              unsigned jobs = 1);

// ---------------------------------------------------------------- probes

// Portable uniform draw on [lo, hi) from a 64-bit engine.
double uniform(std::mt19937_64& rng, double lo, double hi);

// Random market with transport cost t and guaranteed coverage sufficiency:
// c ~ U[0, t], v* ~ U[t, 3t] + t/2, v = 2t + c + U[0, t].
MarketParams random_market(std::mt19937_64& rng, double t);

// ---------------------------------------------------------------- verify

enum class Stage { Stage4, Stage3, Stage2, Stage1, All };

std::string_view to_string(Stage stage);

struct VerifyOptions {
  bool deep = false;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::size_t random_probes = 8;
  std::size_t users = 100000;
  std::size_t q_steps = 2001;
  std::size_t price_steps = 2001;
  // Overrides default_transit_grid when set.
  std::optional<GridSpec> transit_grid;
};

// Runs the selected oracles against the closed forms at fixed probes (all
// branch breakpoints and the minimal-plateau equilibrium) and at seeded
// random probes. Oracle failures become failed verdicts; never throws for
// valid params.
std::vector<OracleVerdict> verify(const MarketParams& params, Stage which,
                                  const VerifyOptions& options = {});

}  // namespace nneq

#endif  // NNEQ_ORACLE_H_
