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

#include "nneq/oracle.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "nneq/parallel.h"

namespace nneq {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Grid points are lo + (hi - lo) * i / (steps - 1); a point meant to sit on a
// coverage bound can miss it by an ulp.
constexpr double kFeasibilitySlack = 1e-12;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::size_t nearest_index(const GridSpec& grid, double x) {
  const double pos = std::round((x - grid.lo) / grid.spacing());
  if (pos <= 0.0) return 0;
  return std::min(grid.steps - 1, static_cast<std::size_t>(pos));
}

// Index of the first maximum of f over the grid.
template <typename F>
std::size_t grid_argmax(const GridSpec& grid, F&& f) {
  std::size_t best = 0;
  double best_value = kNegInf;
  for (std::size_t i = 0; i < grid.steps; ++i) {
    const double value = f(grid.at(i));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

void require_interior(const GridSpec& grid, std::size_t index,
                      std::string_view what) {
  if (index == 0 || index + 1 == grid.steps) {
    throw OracleError(OracleErrorKind::GridTooNarrow,
                      std::string(what) + " argmax on grid end " +
                          fmt(grid.at(index)) + " of [" + fmt(grid.lo) + ", " +
                          fmt(grid.hi) + "]");
  }
}

// Measure of {x in [a, b] : f(x) >= 0 and g(x) >= 0} for f, g linear on
// [a, b], given their end values.
double measure_both_nonnegative(double a, double b, double fa, double fb,
                                double ga, double gb) {
  auto nonneg_interval = [&](double ha, double hb) -> std::pair<double, double> {
    if (ha >= 0.0 && hb >= 0.0) return {a, b};
    if (ha < 0.0 && hb < 0.0) return {b, a};  // empty
    const double root = a + (b - a) * ha / (ha - hb);
    return ha >= 0.0 ? std::pair{a, root} : std::pair{root, b};
  };
  const auto [f_lo, f_hi] = nonneg_interval(fa, fb);
  const auto [g_lo, g_hi] = nonneg_interval(ga, gb);
  return std::max(0.0, std::min(f_hi, g_hi) - std::max(f_lo, g_lo));
}


double best_isp_payoff(const MarketParams& params, Isp isp, double x,
                       const StrategyProfile& fees) {
  return user_utility_internet(params, isp, x, fees) +
         std::max(0.0, user_utility_content(params, isp, x, fees));
}

double isp_payoff_for(const MarketParams& params, const StrategyProfile& fees,
                      Isp isp, SplitModel model, std::size_t users) {
  const MarketSplit split = model == SplitModel::Analytic
                                ? split_from_fees(params, fees)
                                : simulate_users(params, fees, users).split;
  const IspPayoffs pay = isp_payoffs(params, fees, split);
  return isp == Isp::N ? pay.pi_N : pay.pi_NN;
}

}  // namespace

void GridSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || steps < 2) {
    throw std::invalid_argument("grid needs finite lo < hi and steps >= 2, got [" +
                                fmt(lo) + ", " + fmt(hi) + "] with " +
                                std::to_string(steps) + " steps");
  }
}

GridSpec default_q_grid(const MarketParams& params) {
  const double anchor = params.v_star() - params.t() / 2.0;
  return {anchor - 3.0 * params.t(), anchor + params.t(), 2001};
}

GridSpec default_price_grid(const MarketParams& params) {
  return {params.c() - params.t(), params.c() + 3.0 * params.t(), 2001};
}

GridSpec default_transit_grid(const MarketParams& params) {
  return {-2.0 * params.t(), 2.0 * params.t(), 401};
}

std::string_view to_string(OracleErrorKind kind) {
  switch (kind) {
    case OracleErrorKind::NonConvergence: return "NonConvergence";
    case OracleErrorKind::GridTooNarrow: return "GridTooNarrow";
    case OracleErrorKind::EmptyFeasibleSet: return "EmptyFeasibleSet";
  }
  return "?";
}

OracleError::OracleError(OracleErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

OracleVerdict make_verdict(std::string target, std::vector<double> closed_form,
                           std::vector<double> oracle, double tolerance,
                           std::string diagnostics) {
  double discrepancy = closed_form.size() == oracle.size()
                           ? 0.0
                           : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(closed_form.size(), oracle.size()); ++i) {
    const double d = std::abs(closed_form[i] - oracle[i]);
    // NaN must fail.
    discrepancy = std::isnan(d) ? d : std::max(discrepancy, d);
  }
  OracleVerdict verdict{.target = std::move(target),
                        .closed_form_value = std::move(closed_form),
                        .oracle_value = std::move(oracle),
                        .discrepancy = discrepancy,
                        .tolerance_used = tolerance,
                        .pass = discrepancy <= tolerance,
                        .diagnostics = std::move(diagnostics)};
  return verdict;
}

// ---------------------------------------------------------------- stage 4

SimulatedMarket simulate_users(const MarketParams& params,
                               const StrategyProfile& fees, std::size_t m) {
  if (m < 2) throw std::invalid_argument("simulate_users needs m >= 2");

  std::size_t n_sub_N = 0, n_only_N = 0, n_sub_NN = 0, n_only_NN = 0, out = 0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * inv_m;
    const double access_N = user_utility_internet(params, Isp::N, x, fees);
    const double access_NN = user_utility_internet(params, Isp::NN, x, fees);
    const std::array<double, 5> options = {
        access_N + user_utility_content(params, Isp::N, x, fees),
        access_N,
        access_NN + user_utility_content(params, Isp::NN, x, fees),
        access_NN,
        0.0,
    };
    std::size_t choice = 0;
    for (std::size_t k = 1; k < options.size(); ++k) {
      if (options[k] > options[choice]) choice = k;
    }
    switch (choice) {
      case 0: ++n_sub_N; break;
      case 1: ++n_only_N; break;
      case 2: ++n_sub_NN; break;
      case 3: ++n_only_NN; break;
      default: ++out; break;
    }
  }

  SimulatedMarket result;
  result.users = m;
  result.opted_out = out;
  result.split = {
      .n_N = static_cast<double>(n_sub_N + n_only_N) * inv_m,
      .n_NN = static_cast<double>(n_sub_NN + n_only_NN) * inv_m,
      .n_sub_N = static_cast<double>(n_sub_N) * inv_m,
      .n_sub_NN = static_cast<double>(n_sub_NN) * inv_m,
      .interior = out == 0 && n_sub_N + n_only_N > 0 && n_sub_NN + n_only_NN > 0,
  };
  if (out > 0) {
    result.diagnostic = std::to_string(out) + " of " + std::to_string(m) +
                        " users opted out; full ISP coverage violated";
  } else if (n_only_N + n_only_NN > 0) {
    result.diagnostic = std::to_string(n_only_N + n_only_NN) +
                        " users skip the content; full CP coverage violated";
  }
  return result;
}

MarketSplit participation_shares(const MarketParams& params,
                                 const StrategyProfile& fees) {
  std::vector<double> kinks = {0.0, 0.5, 1.0};
  for (Isp isp : {Isp::N, Isp::NN}) {
    const double r = (params.v_star() - fees.subscription_fee(isp)) / params.t();
    for (double x : {r, 1.0 - r}) {
      if (x > 0.0 && x < 1.0) kinks.push_back(x);
    }
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());

  MarketSplit split{};
  for (std::size_t k = 0; k + 1 < kinks.size(); ++k) {
    const double a = kinks[k];
    const double b = kinks[k + 1];
    const double mid = 0.5 * (a + b);
    const double fa = best_isp_payoff(params, Isp::N, a, fees);
    const double fb = best_isp_payoff(params, Isp::N, b, fees);
    const double ga = best_isp_payoff(params, Isp::NN, a, fees);
    const double gb = best_isp_payoff(params, Isp::NN, b, fees);
    // N wins where f >= g and f >= 0; NN where g > f and g >= 0.
    const double to_N = measure_both_nonnegative(a, b, fa - ga, fb - gb, fa, fb);
    const double to_NN = measure_both_nonnegative(a, b, ga - fa, gb - fb, ga, gb);
    split.n_N += to_N;
    split.n_NN += to_NN;
    // The sign of the content utility is constant between kinks.
    if (user_utility_content(params, Isp::N, mid, fees) >= 0.0) {
      split.n_sub_N += to_N;
    }
    if (user_utility_content(params, Isp::NN, mid, fees) >= 0.0) {
      split.n_sub_NN += to_NN;
    }
  }
  split.interior = split.n_N + split.n_NN >= 1.0 - 1e-12 && split.n_N > 0.0 &&
                   split.n_NN > 0.0;
  return split;
}

// ---------------------------------------------------------------- stage 3

PriceNashResult price_nash_oracle(const MarketParams& params, double p_tilde,
                                  double q_N, double q_NN,
                                  const GridSpec& grid, int max_iters) {
  grid.validate();
  StrategyProfile fees{.p_tilde = p_tilde, .q_N = q_N, .q_NN = q_NN};
  auto payoff = [&](Isp isp, double p_N, double p_NN) {
    fees.p_N = p_N;
    fees.p_NN = p_NN;
    return isp_payoff_for(params, fees, isp, SplitModel::Analytic, 0);
  };

  std::size_t i_N = nearest_index(grid, params.t() + params.c());
  std::size_t i_NN = i_N;
  PriceNashResult result;
  for (int iter = 1; iter <= max_iters; ++iter) {
    const double rival_NN = grid.at(i_NN);
    const std::size_t next_N = grid_argmax(
        grid, [&](double p) { return payoff(Isp::N, p, rival_NN); });
    require_interior(grid, next_N, "ISP N best response");
    const double rival_N = grid.at(next_N);
    const std::size_t next_NN = grid_argmax(
        grid, [&](double p) { return payoff(Isp::NN, rival_N, p); });
    require_interior(grid, next_NN, "ISP NN best response");

    result.iterations = iter;
    const bool repeated = next_N == i_N && next_NN == i_NN;
    i_N = next_N;
    i_NN = next_NN;
    if (repeated) {
      result.converged = true;
      break;
    }
  }
  result.p_N = grid.at(i_N);
  result.p_NN = grid.at(i_NN);
  return result;
}

DeviationGain max_deviation_gain(const MarketParams& params,
                                 const StrategyProfile& fees,
                                 const GridSpec& grid, SplitModel model,
                                 std::size_t window, std::size_t users) {
  grid.validate();
  DeviationGain gain;
  double largest_margin = 0.0;
  for (Isp isp : {Isp::N, Isp::NN}) {
    const double own = fees.connection_fee(isp);
    const double base = isp_payoff_for(params, fees, isp, model, users);
    std::size_t lo = 0, hi = grid.steps - 1;
    if (window > 0) {
      const std::size_t centre = nearest_index(grid, own);
      lo = centre > window ? centre - window : 0;
      hi = std::min(grid.steps - 1, centre + window);
    }
    double best = 0.0;
    StrategyProfile deviated = fees;
    for (std::size_t i = lo; i <= hi; ++i) {
      (isp == Isp::N ? deviated.p_N : deviated.p_NN) = grid.at(i);
      largest_margin =
          std::max(largest_margin, std::abs(grid.at(i) - params.c()));
      best = std::max(best,
                      isp_payoff_for(params, deviated, isp, model, users) - base);
    }
    (isp == Isp::N ? gain.gain_N : gain.gain_NN) = best;
  }
  // A simulated share is off by at most 1/users, so a payoff is off by at
  // most (|p - c| + |p_tilde|) / users; a gain compares two of them.
  gain.tolerance =
      model == SplitModel::Analytic
          ? 1e-12
          : 2.0 * (largest_margin + std::abs(fees.p_tilde)) /
                    static_cast<double>(users) +
                1e-12;
  return gain;
}

// ---------------------------------------------------------------- stage 2

CpArgmaxResult cp_argmax_oracle(const MarketParams& params, double p_tilde,
                                const GridSpec& grid_qN,
                                const GridSpec& grid_qNN, unsigned jobs) {
  grid_qN.validate();
  grid_qNN.validate();

  struct ChunkBest {
    double value = kNegInf;
    std::size_t i = 0, j = 0;
    std::size_t feasible = 0;
    double set1 = kNegInf;
    double set4 = kNegInf;
  };
  std::vector<ChunkBest> bests(chunk_count(grid_qN.steps, jobs));

  parallel_chunks(grid_qN.steps, jobs, [&](std::size_t chunk,
                                           std::size_t begin, std::size_t end) {
    ChunkBest local;
    for (std::size_t i = begin; i < end; ++i) {
      const double q_N = grid_qN.at(i);
      for (std::size_t j = 0; j < grid_qNN.steps; ++j) {
        const double q_NN = grid_qNN.at(j);
        const double delta_q = q_NN - q_N;
        const CoverageBounds bounds = coverage_bounds(params, p_tilde, delta_q);
        if (q_N > bounds.active_bound_qN() + kFeasibilitySlack ||
            q_NN > bounds.active_bound_qNN() + kFeasibilitySlack) {
          continue;
        }
        ++local.feasible;
        const double value = cp_reduced_payoff(params, p_tilde, q_N, q_NN);
        if (value > local.value) {
          local.value = value;
          local.i = i;
          local.j = j;
        }
        if (-5.0 * delta_q < p_tilde && p_tilde < delta_q) {
          local.set1 = std::max(local.set1, value);
        } else if (delta_q < p_tilde && p_tilde < -5.0 * delta_q) {
          local.set4 = std::max(local.set4, value);
        }
      }
    }
    bests[chunk] = local;
  });

  // Chunks cover increasing i, so a strict comparison keeps the first
  // maximum in index order.
  ChunkBest best;
  for (const ChunkBest& b : bests) {
    best.feasible += b.feasible;
    best.set1 = std::max(best.set1, b.set1);
    best.set4 = std::max(best.set4, b.set4);
    if (b.value > best.value) {
      best.value = b.value;
      best.i = b.i;
      best.j = b.j;
    }
  }
  if (best.feasible == 0) {
    throw OracleError(OracleErrorKind::EmptyFeasibleSet,
                      "no (q_N, q_NN) grid point keeps every user subscribed at "
                      "p_tilde = " + fmt(p_tilde));
  }
  require_interior(grid_qN, best.i, "q_N");
  require_interior(grid_qNN, best.j, "q_NN");

  CpArgmaxResult result;
  result.q_N = grid_qN.at(best.i);
  result.q_NN = grid_qNN.at(best.j);
  result.pi_G = best.value;
  result.feasible_points = best.feasible;
  if (best.set1 > kNegInf) result.best_in_set1 = best.set1;
  if (best.set4 > kNegInf) result.best_in_set4 = best.set4;
  return result;
}

bool binding_fee_check(const CpArgmaxResult& result, const CoverageBounds& bounds,
                  double spacing) {
  return std::abs(bounds.active_bound_qN() - result.q_N) <= spacing ||
         std::abs(bounds.active_bound_qNN() - result.q_NN) <= spacing;
}

// ---------------------------------------------------------------- stage 1

TransitArgmaxResult transit_fee_argmax_oracle(const MarketParams& params,
                                              const GridSpec& grid,
                                              OracleDepth depth,
                                              double plateau_tolerance,
                                              unsigned jobs) {
  grid.validate();
  if (grid.hi < plateau_start(params)) {
    throw OracleError(OracleErrorKind::GridTooNarrow,
                      "transit-fee grid ends at " + fmt(grid.hi) +
                          ", below the plateau start " +
                          fmt(plateau_start(params)));
  }

  TransitArgmaxResult result;
  result.grid_p_tilde.resize(grid.steps);
  result.pi_NN_values.resize(grid.steps);
  const GridSpec q_grid = default_q_grid(params);

  parallel_for(grid.steps, depth == OracleDepth::Deep ? jobs : 1,
               [&](std::size_t k) {
    const double p_tilde = grid.at(k);
    double q_N = 0.0, q_NN = 0.0;
    if (depth == OracleDepth::Deep) {
      const CpArgmaxResult cp = cp_argmax_oracle(params, p_tilde, q_grid, q_grid);
      q_N = cp.q_N;
      q_NN = cp.q_NN;
    } else {
      const CpResponse cp = cp_best_response(params, p_tilde);
      q_N = cp.q_N_e;
      q_NN = cp.q_NN_e;
    }
    const StagePrices prices = stage3_prices(params, p_tilde, q_N, q_NN);
    const StrategyProfile fees{.p_tilde = p_tilde,
                               .q_N = q_N,
                               .q_NN = q_NN,
                               .p_N = prices.p_N,
                               .p_NN = prices.p_NN};
    result.grid_p_tilde[k] = p_tilde;
    result.pi_NN_values[k] =
        isp_payoffs(params, fees, split_from_fees(params, fees)).pi_NN;
  });

  const std::size_t best = static_cast<std::size_t>(
      std::max_element(result.pi_NN_values.begin(), result.pi_NN_values.end()) -
      result.pi_NN_values.begin());
  result.p_tilde = result.grid_p_tilde[best];
  result.pi_NN = result.pi_NN_values[best];
  for (std::size_t k = 0; k < grid.steps; ++k) {
    if (result.pi_NN_values[k] >= result.pi_NN - plateau_tolerance) {
      result.argmax_set.push_back(result.grid_p_tilde[k]);
    }
  }
  return result;
}

// ---------------------------------------------------------------- probes

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

MarketParams random_market(std::mt19937_64& rng, double t) {
  const double c = uniform(rng, 0.0, t);
  const double v_star = uniform(rng, t, 3.0 * t) + t / 2.0;
  const double v = 2.0 * t + c + uniform(rng, 0.0, t);
  return MarketParams(v, v_star, t, c);
}

// ---------------------------------------------------------------- verify

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Stage4: return "Stage4";
    case Stage::Stage3: return "Stage3";
    case Stage::Stage2: return "Stage2";
    case Stage::Stage1: return "Stage1";
    case Stage::All: return "All";
  }
  return "?";
}

namespace {

OracleVerdict failed_verdict(std::string target, const std::exception& e,
                             std::string context) {
  OracleVerdict v;
  v.target = std::move(target);
  v.discrepancy = std::numeric_limits<double>::infinity();
  v.pass = false;
  v.diagnostics = std::move(context) + "; " + e.what();
  return v;
}

std::mt19937_64 stage_rng(std::uint64_t seed, Stage stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stage)};
  return std::mt19937_64(seq);
}

StrategyProfile full_fees(const MarketParams& params, double p_tilde,
                          double q_N, double q_NN) {
  const StagePrices prices = stage3_prices(params, p_tilde, q_N, q_NN);
  return {.p_tilde = p_tilde,
          .q_N = q_N,
          .q_NN = q_NN,
          .p_N = prices.p_N,
          .p_NN = prices.p_NN};
}

void verify_stage4(const MarketParams& params, const VerifyOptions& options,
                   std::vector<OracleVerdict>& out) {
  const double t = params.t();
  const double anchor = params.v_star() - t / 2.0;
  std::vector<std::pair<std::string, StrategyProfile>> probes;
  probes.emplace_back("minimal-plateau equilibrium", solve_spe(params).fees);
  probes.emplace_back("symmetric fees",
                      StrategyProfile{.q_N = anchor,
                                      .q_NN = anchor,
                                      .p_N = t + params.c(),
                                      .p_NN = t + params.c()});
  std::mt19937_64 rng = stage_rng(options.seed, Stage::Stage4);
  for (std::size_t k = 0; k < options.random_probes; ++k) {
    StrategyProfile fees;
    fees.p_N = params.c() + uniform(rng, 0.0, t);
    fees.p_NN = params.c() + uniform(rng, 0.0, t);
    fees.q_N = anchor - uniform(rng, 0.0, t);
    fees.q_NN = anchor - uniform(rng, 0.0, t);
    fees.p_tilde = uniform(rng, -2.0 * t, 2.0 * t);
    probes.emplace_back("random probe " + std::to_string(k), fees);
  }

  for (const auto& [label, fees] : probes) {
    const MarketSplit analytic = split_from_fees(params, fees);
    const CoverageFlags coverage = check_full_coverage(params, fees, analytic);
    const SimulatedMarket sim = simulate_users(params, fees, options.users);
    std::string diag = label;
    MarketSplit expected = analytic;
    if (!coverage.isp_ok || !coverage.cp_ok) {
      expected = participation_shares(params, fees);
      diag += "; coverage violated (isp_ok=" +
              std::string(coverage.isp_ok ? "true" : "false") +
              ", cp_ok=" + std::string(coverage.cp_ok ? "true" : "false") +
              "), compared against partial-participation shares";
    }
    if (!sim.diagnostic.empty()) diag += "; " + sim.diagnostic;
    out.push_back(make_verdict(
        "indifferent_user",
        {expected.n_N, expected.n_NN, expected.n_sub_N, expected.n_sub_NN},
        {sim.split.n_N, sim.split.n_NN, sim.split.n_sub_N, sim.split.n_sub_NN},
        1e-4, diag));
  }
}

void verify_stage3(const MarketParams& params, const VerifyOptions& options,
                   std::vector<OracleVerdict>& out) {
  const double t = params.t();
  const double anchor = params.v_star() - t / 2.0;
  GridSpec grid = default_price_grid(params);
  grid.steps = options.price_steps;

  std::vector<std::pair<double, double>> probes;  // (p_tilde, delta_q)
  for (double p : {-2.0 * t, -1.25 * t, 0.0, 1.25 * t, 2.0 * t}) {
    probes.emplace_back(p, cp_best_response(params, p).delta_q_e);
  }
  std::mt19937_64 rng = stage_rng(options.seed, Stage::Stage3);
  for (std::size_t k = 0; k < options.random_probes; ++k) {
    const double p = uniform(rng, -2.0 * t, 2.0 * t);
    probes.emplace_back(p, uniform(rng, -t, t));
  }

  for (const auto& [p_tilde, delta_q] : probes) {
    // Both fees at or below v* - t/2 keep every user subscribed.
    const double q_N = anchor - std::max(0.0, delta_q);
    const double q_NN = q_N + delta_q;
    const std::string probe =
        "p_tilde=" + fmt(p_tilde) + " delta_q=" + fmt(delta_q);
    const StrategyProfile fees = full_fees(params, p_tilde, q_N, q_NN);
    try {
      const PriceNashResult nash =
          price_nash_oracle(params, p_tilde, q_N, q_NN, grid);
      OracleVerdict v = make_verdict(
          "stage3_prices", {fees.p_N, fees.p_NN}, {nash.p_N, nash.p_NN},
          std::max(grid.spacing(), 1e-6) * (1.0 + 1e-9),
          probe + "; best-response rounds " + std::to_string(nash.iterations));
      if (!nash.converged) {
        v.pass = false;
        v.diagnostics += "; NonConvergence after " +
                         std::to_string(nash.iterations) + " rounds";
      }
      out.push_back(std::move(v));
    } catch (const std::exception& e) {
      out.push_back(failed_verdict("stage3_prices", e, probe));
    }

    const DeviationGain gain =
        max_deviation_gain(params, fees, grid, SplitModel::Analytic);
    out.push_back(make_verdict("stage3_prices/no_deviation", {0.0, 0.0},
                               {gain.gain_N, gain.gain_NN}, gain.tolerance,
                               probe + "; best unilateral grid deviation"));

    if (options.deep) {
      const MarketSplit analytic = split_from_fees(params, fees);
      const SimulatedMarket sim = simulate_users(params, fees, options.users);
      out.push_back(make_verdict(
          "stage3_prices/simulated_split", {analytic.n_N, analytic.n_NN},
          {sim.split.n_N, sim.split.n_NN}, 1e-4,
          probe + "; clamped split vs discrete users at the closed-form prices"));
      const DeviationGain sim_gain = max_deviation_gain(
          params, fees, grid, SplitModel::Simulated, 10, options.users);
      out.push_back(make_verdict(
          "stage3_prices/no_deviation_simulated", {0.0, 0.0},
          {sim_gain.gain_N, sim_gain.gain_NN}, sim_gain.tolerance,
          probe + "; +-10 grid deviations against discrete users"));
    }
  }
}

void verify_stage2(const MarketParams& params, const VerifyOptions& options,
                   std::vector<OracleVerdict>& out) {
  const double t = params.t();
  GridSpec grid = default_q_grid(params);
  grid.steps = options.q_steps;
  const double tolerance = std::max(grid.spacing(), 1e-6) * (1.0 + 1e-9);

  std::vector<double> probes = {-2.0 * t, -1.25 * t, -0.5 * t, 0.0,
                                0.5 * t,  1.25 * t,  2.0 * t};
  std::mt19937_64 rng = stage_rng(options.seed, Stage::Stage2);
  for (std::size_t k = 0; k < options.random_probes; ++k) {
    probes.push_back(uniform(rng, -2.0 * t, 2.0 * t));
  }

  for (double p_tilde : probes) {
    const std::string probe = "p_tilde=" + fmt(p_tilde);
    CpArgmaxResult cp;
    try {
      cp = cp_argmax_oracle(params, p_tilde, grid, grid, options.jobs);
    } catch (const std::exception& e) {
      out.push_back(failed_verdict("cp_best_response", e, probe));
      continue;
    }

    // At a breakpoint both adjacent branches are compared.
    std::vector<Branch> branches = {branch_for(params, p_tilde)};
    const double edge = plateau_start(params);
    if (p_tilde == -edge) branches.push_back(Branch::B2);
    if (p_tilde == 0.0) branches.push_back(Branch::B3);
    if (p_tilde == edge) branches.push_back(Branch::B4);
    for (Branch b : branches) {
      const CpResponse closed = cp_response_on_branch(params, p_tilde, b);
      out.push_back(make_verdict(
          "cp_best_response", {closed.q_N_e, closed.q_NN_e}, {cp.q_N, cp.q_NN},
          tolerance,
          probe + "; branch " + std::string(to_string(b)) + "; " +
              std::to_string(cp.feasible_points) + " feasible grid points"));
    }

    const CoverageBounds bounds =
        coverage_bounds(params, p_tilde, cp.q_NN - cp.q_N);
    const double gap = std::min(std::abs(bounds.active_bound_qN() - cp.q_N),
                                std::abs(bounds.active_bound_qNN() - cp.q_NN));
    OracleVerdict binding{.target = "cp_best_response/binding_fee",
                        .closed_form_value = {bounds.active_bound_qN(),
                                              bounds.active_bound_qNN()},
                        .oracle_value = {cp.q_N, cp.q_NN},
                        .discrepancy = gap,
                        .tolerance_used = grid.spacing(),
                        .pass = binding_fee_check(cp, bounds, grid.spacing()),
                        .diagnostics = probe + "; distance of the closer fee to "
                                               "its coverage bound"};
    out.push_back(std::move(binding));

    const CpResponse closed = cp_best_response(params, p_tilde);
    const double closed_value =
        cp_reduced_payoff(params, p_tilde, closed.q_N_e, closed.q_NN_e);
    double eliminated_best = kNegInf;
    if (cp.best_in_set1) eliminated_best = std::max(eliminated_best, *cp.best_in_set1);
    if (cp.best_in_set4) eliminated_best = std::max(eliminated_best, *cp.best_in_set4);
    const double excess = std::max(0.0, eliminated_best - closed_value);
    out.push_back(OracleVerdict{
        .target = "candidate_sets/eliminated",
        .closed_form_value = {closed_value},
        .oracle_value = {eliminated_best},
        .discrepancy = excess,
        .tolerance_used = 1e-9,
        .pass = excess <= 1e-9,
        .diagnostics = probe + (eliminated_best > kNegInf
                                    ? "; best feasible payoff strictly inside "
                                      "sets 1 and 4"
                                    : "; no grid point strictly inside sets 1 "
                                      "and 4")});
  }
}

void verify_stage1(const MarketParams& params, const VerifyOptions& options,
                   std::vector<OracleVerdict>& out) {
  const double t = params.t();
  const double edge = plateau_start(params);

  // Adjacent closed-form pieces agree at the breakpoints.
  const std::array<std::pair<Branch, Branch>, 3> pairs = {
      std::pair{Branch::B1, Branch::B2}, std::pair{Branch::B2, Branch::B3},
      std::pair{Branch::B3, Branch::B4}};
  const std::array<double, 3> breaks = {-edge, 0.0, edge};
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    const auto [left, right] = pairs[k];
    const double p = breaks[k];
    out.push_back(make_verdict(
        "stage1_payoff/continuity", {stage1_payoff_on_branch(params, p, left)},
        {stage1_payoff_on_branch(params, p, right)}, 1e-12,
        "p_tilde=" + fmt(p) + "; " + std::string(to_string(left)) + " vs " +
            std::string(to_string(right))));
    const CpResponse a = cp_response_on_branch(params, p, left);
    const CpResponse b = cp_response_on_branch(params, p, right);
    out.push_back(make_verdict(
        "cp_best_response/continuity", {a.delta_q_e, a.q_N_e, a.q_NN_e},
        {b.delta_q_e, b.q_N_e, b.q_NN_e}, 1e-12,
        "p_tilde=" + fmt(p) + "; " + std::string(to_string(left)) + " vs " +
            std::string(to_string(right))));
  }

  const GridSpec grid = options.transit_grid.value_or(default_transit_grid(params));
  const std::string grid_desc = "grid [" + fmt(grid.lo) + ", " + fmt(grid.hi) +
                                "] x " + std::to_string(grid.steps);
  TransitArgmaxResult fast;
  try {
    fast = transit_fee_argmax_oracle(params, grid, OracleDepth::Fast);
  } catch (const std::exception& e) {
    out.push_back(failed_verdict("stage1_payoff", e, grid_desc));
    return;
  }

  out.push_back(make_verdict("stage1_payoff/max", {9.0 * t / 8.0}, {fast.pi_NN},
                             1e-6, grid_desc));

  std::vector<double> expected_set;
  double curve_error = 0.0;
  for (std::size_t k = 0; k < fast.grid_p_tilde.size(); ++k) {
    const double p = fast.grid_p_tilde[k];
    if (p >= edge) expected_set.push_back(p);
    curve_error = std::max(curve_error,
                           std::abs(stage1_payoff(params, p) - fast.pi_NN_values[k]));
  }
  const bool same_set = expected_set == fast.argmax_set;
  out.push_back(OracleVerdict{
      .target = "stage1_payoff/argmax_set",
      .closed_form_value = {static_cast<double>(expected_set.size()),
                            expected_set.empty() ? 0.0 : expected_set.front()},
      .oracle_value = {static_cast<double>(fast.argmax_set.size()),
                       fast.argmax_set.empty() ? 0.0 : fast.argmax_set.front()},
      .discrepancy = same_set ? 0.0 : 1.0,
      .tolerance_used = 0.0,
      .pass = same_set,
      .diagnostics = grid_desc + "; (count, first point) of grid points with "
                                 "maximal pi_NN vs those >= 5t/4"});
  out.push_back(OracleVerdict{
      .target = "stage1_payoff/curve",
      .closed_form_value = {},
      .oracle_value = {},
      .discrepancy = curve_error,
      .tolerance_used = 1e-9,
      .pass = curve_error <= 1e-9,
      .diagnostics = grid_desc + "; worst gap between the piecewise payoff and "
                                 "pi_NN recomputed through stages 2-4"});

  if (options.deep) {
    const GridSpec q_grid = default_q_grid(params);
    TransitArgmaxResult deep;
    try {
      deep = transit_fee_argmax_oracle(params, grid, OracleDepth::Deep,
                                       2.0 * q_grid.spacing(), options.jobs);
    } catch (const std::exception& e) {
      out.push_back(failed_verdict("stage1_payoff/deep", e, grid_desc));
      return;
    }
    double deep_error = 0.0;
    for (std::size_t k = 0; k < deep.grid_p_tilde.size(); ++k) {
      deep_error = std::max(deep_error,
                            std::abs(stage1_payoff(params, deep.grid_p_tilde[k]) -
                                     deep.pi_NN_values[k]));
    }
    // pi_NN moves by at most 2/3 per unit of (delta_q - p_tilde), and each
    // grid fee is within one spacing.
    const double tolerance = 2.0 * q_grid.spacing();
    out.push_back(OracleVerdict{
        .target = "stage1_payoff/deep_curve",
        .closed_form_value = {9.0 * t / 8.0},
        .oracle_value = {deep.pi_NN},
        .discrepancy = deep_error,
        .tolerance_used = tolerance,
        .pass = deep_error <= tolerance,
        .diagnostics = grid_desc + "; CP response from the grid argmax"});
  }
}

}  // namespace

std::vector<OracleVerdict> verify(const MarketParams& params, Stage which,
                                  const VerifyOptions& options) {
  std::vector<OracleVerdict> out;
  const bool all = which == Stage::All;
  if (all || which == Stage::Stage4) verify_stage4(params, options, out);
  if (all || which == Stage::Stage3) verify_stage3(params, options, out);
  if (all || which == Stage::Stage2) verify_stage2(params, options, out);
  if (all || which == Stage::Stage1) verify_stage1(params, options, out);
  return out;
}

}  // namespace nneq
