//------------------------------------------------------------------------------
//
//   Copyright 2026 The datamarket Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "datamarket/coalition.hpp"
#include "datamarket/config.hpp"
#include "datamarket/experiments.hpp"
#include "datamarket/leakage.hpp"
#include "datamarket/oracle.hpp"
#include "datamarket/random.hpp"
#include "datamarket/valuation.hpp"

#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace datamarket;

namespace {

int failures = 0;

struct Stopwatch
{
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int id, bool ok, double seconds, double limit, std::string const &detail)
{
  bool const pass = ok && seconds < limit;
  failures += pass ? 0 : 1;
  std::printf("%s criterion %d: %s [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", id, detail.c_str(),
              seconds, limit);
  std::fflush(stdout);
}

std::string fmt(double x, int digits = 4)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

bool budget_balanced(SolveTrace const &t)
{
  double const paid = std::accumulate(t.final_prices.begin(), t.final_prices.end(), 0.0);
  return std::abs(paid - t.final_partition.total_budget) <= 1e-9;
}

std::size_t budget_checks   = 0;
std::size_t budget_failures = 0;

void record_budget(SolveTrace const &t)
{
  ++budget_checks;
  budget_failures += budget_balanced(t) ? 0 : 1;
}

bool stable_partition_exists(HedonicGame const &game)
{
  for (oracle::PartitionEnumeration e(game.size()); !e.done(); e.next())
  {
    std::vector<Coalition> cs;
    bool                   homogeneous = true;
    for (auto const &b : e.partition())
    {
      int const level = game.level(b.front());
      for (auto m : b)
      {
        homogeneous = homogeneous && game.level(m) == level;
      }
      cs.push_back({cs.size(), b, level, 0.0});
    }
    if (homogeneous && is_nash_stable(game, cs))
    {
      return true;
    }
  }
  return false;
}

void walkthrough()
{
  Stopwatch sw;
  auto      game   = walkthrough_game();
  auto      trace  = solve_hedonic(game, {}, 1);
  auto      blocks = blocks_of(trace.final_partition);
  std::sort(blocks.begin(), blocks.end());
  auto const best = oracle::optimal_partition(4, oracle::game_worth(game));
  record_budget(trace);
  bool const ok = blocks == std::vector<std::vector<std::size_t>>{{0, 2}, {1}, {3}} &&
                  trace.final_value == 2.0 && best.value == 2.0 && best.partition == blocks;
  report(1, ok, sw.seconds(), 1, "walk-through partition {{1,3},{2},{4}}, value " + fmt(trace.final_value, 1) +
                                     ", optimum " + fmt(best.value, 1));
}

void dominance()
{
  Stopwatch   sw;
  std::size_t above = 0, ratio_fail = 0, engine_mismatch = 0;
  double      worst = 1.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    std::size_t const M = 3 + seed % 6;
    auto              r = testing::random_market(M, 1000 + seed);
    MarketGame        game(r.devices, r.g, r.params);
    auto              trace = majp_solve(game, 2, {}, seed);
    record_budget(trace);
    auto const   worth  = oracle::market_worth(r.devices, r.g, r.params, trace.levels);
    auto const   blocks = blocks_of(trace.final_partition);
    double const v      = oracle::canonical_value(blocks, worth);
    auto const   best   = oracle::optimal_partition(M, worth);
    std::size_t  largest = 0;
    for (auto const &b : blocks)
    {
      largest = std::max(largest, b.size());
    }
    above += v > best.value ? 1 : 0;
    engine_mismatch += std::abs(v - trace.final_value) > 1e-9 ? 1 : 0;
    auto const verdict = oracle::ratio_bound_check(v, best.value, largest);
    ratio_fail += verdict.checked && !verdict.pass ? 1 : 0;
    if (best.value > 0.0)
    {
      worst = std::min(worst, v / best.value);
    }
  }
  report(2, above == 0 && ratio_fail == 0 && engine_mismatch == 0, sw.seconds(), 60,
         "200 instances: v(MAJP) > v* in " + std::to_string(above) + ", ratio check failures " +
             std::to_string(ratio_fail) + ", engine/oracle value mismatches " +
             std::to_string(engine_mismatch) + ", lowest v/v* " + fmt(worst));
}

void monotone_and_stable()
{
  Stopwatch   sw;
  std::size_t decreasing = 0, unstable = 0, no_stable_exists = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
  {
    std::size_t const M = 3 + seed % 6;
    auto              r = testing::random_market(M, seed);
    MarketGame        game(r.devices, r.g, r.params);
    auto              trace = majp_solve(game, 2, {}, seed);
    record_budget(trace);
    double last = trace.initial_value;
    for (auto const &row : trace.iterations)
    {
      decreasing += row.value_after < row.value_before || row.value_after < last ? 1 : 0;
      last = row.value_after;
    }
    if (!is_nash_stable(game, trace.final_partition.coalitions))
    {
      ++unstable;
      no_stable_exists += stable_partition_exists(game) ? 0 : 1;
    }
  }
  report(3, decreasing == 0 && unstable == 0, sw.seconds(), 60,
         "1000 instances: decreasing trace steps " + std::to_string(decreasing) +
             ", final partitions not Nash-stable " + std::to_string(unstable) + " (of which " +
             std::to_string(no_stable_exists) + " admit no Nash-stable partition at all)");
}

void correlation()
{
  Stopwatch    sw;
  double const tol = 5e-4;
  auto const   run = three_seller_convergence(40'000'000, 1, tol);
  double const xz = 0.5 / std::sqrt(1.25), yz = 1.0 / std::sqrt(1.25);
  double const exz   = std::abs(run.leakage.r(0, 2) - xz);
  double const eyz   = std::abs(run.leakage.r(1, 2) - yz);
  auto const   rxz   = run.leakage.rounds_to_converge[0][2];
  auto const   ryz   = run.leakage.rounds_to_converge[1][2];
  bool const   ok    = exz < tol && eyz < tol && rxz != kNotConverged && ryz != kNotConverged;
  report(4, ok, sw.seconds(), 10,
         "|r_XZ - 0.4472| = " + fmt(exz, 6) + ", |r_YZ - 0.8944| = " + fmt(eyz, 6) + ", rounds " +
             std::to_string(rxz) + " / " + std::to_string(ryz));
}

void table_two()
{
  Stopwatch       sw;
  Eigen::MatrixXd g(2, 2);
  g << 0, 1, 1, 0;
  std::vector<std::size_t> const pair{0, 1};
  // a-flags record who is in the market when each seller trades
  double const i_coalition = opportunity_cost(0, pair, {true, true}, g);
  double const i_first     = opportunity_cost(0, pair, {true, false}, g);
  double const i_second    = opportunity_cost(1, pair, {true, true}, g);
  double const ii_coalition = opportunity_cost(1, pair, {true, true}, g);
  double const ii_first     = opportunity_cost(1, pair, {false, true}, g);
  double const ii_second    = opportunity_cost(0, pair, {true, true}, g);
  bool const   ok = i_coalition == 1.0 && i_first == 0.0 && i_second == 1.0 && ii_coalition == 1.0 &&
                  ii_first == 0.0 && ii_second == 1.0;
  report(5, ok, sw.seconds(), 1,
         "case I coalition " + fmt(i_coalition, 0) + ", no coalition " + fmt(i_first, 0) + "/" +
             fmt(i_second, 0) + "; case II coalition " + fmt(ii_coalition, 0) + ", no coalition " +
             fmt(ii_second, 0) + "/" + fmt(ii_first, 0));
}

void leakage_algebra()
{
  Stopwatch                 sw;
  std::vector<double> const shares{0.15, 0.25, 0.6};
  double const              v0    = leakage_valuation(shares, 0.0, 0.1, 3.0);
  double                    drift = 0.0;
  for (int k = 0; k <= 100; ++k)
  {
    double const g = k / 100.0;
    drift          = std::max(drift, std::abs(leakage_valuation(shares, g, 0.1, 3.0) * (1.0 + g) - v0));
  }
  double const two = leakage_valuation(std::vector<double>{0.5, 0.5}, 0.0, 0.1, 1.0);
  report(6, drift < 1e-12 && std::abs(two - 2.0) < 1e-9, sw.seconds(), 1,
         "max |V(g)(1+g) - V(0)| = " + fmt(drift, 16) + ", V = " + fmt(two, 12));
}

void depression()
{
  Stopwatch   sw;
  auto const  c = default_config();
  std::vector<double> prices;
  for (double p = 1.0; p <= 10.0 + 1e-12; p += 0.5)
  {
    prices.push_back(p);
  }
  DepressionScenario s{c.depression.shares, c.leakage_g, c.depression.late_seller, c.valuation.b};
  std::map<std::size_t, std::vector<double>> late;
  for (auto const &row : value_depression_series(s, prices))
  {
    if (row.seller == s.late_seller)
    {
      late[row.round].push_back(row.value);
    }
  }
  bool rounds_ok = late.size() == c.leakage_g.size();
  bool price_ok  = true;
  for (std::size_t t = 0; t < late.size(); ++t)
  {
    for (std::size_t i = 0; i < prices.size(); ++i)
    {
      rounds_ok = rounds_ok && (t == 0 || late[t][i] <= late[t - 1][i]);
      price_ok  = price_ok && (i == 0 || late[t][i] > late[t][i - 1]);
    }
  }
  report(7, rounds_ok && price_ok, sw.seconds(), 5,
         std::string("late seller curves ") + (rounds_ok ? "non-increasing" : "NOT non-increasing") +
             " in round, " + (price_ok ? "increasing" : "NOT increasing") + " in price over " +
             std::to_string(late.size()) + " rounds");
}

void fig11_band()
{
  Stopwatch   sw;
  auto const  c        = default_config();
  bool        ok       = true;
  double      last_gap = -1e300;
  std::string detail;
  for (std::size_t per_group : {10, 20, 30, 40})
  {
    auto cfg                       = c;
    cfg.scenario.devices_per_group = per_group;
    auto const s                   = monte_carlo(cfg, 100, 1);
    ok = ok && s.cooperative.mean > s.baseline.mean && s.gap.mean >= last_gap;
    last_gap = s.gap.mean;
    detail += " " + std::to_string(per_group) + ":" + fmt(s.cooperative.mean, 3) + "/" +
              fmt(s.baseline.mean, 3);
    if (per_group == 40)
    {
      ok = ok && s.cooperative.mean >= 0.67 && s.cooperative.mean <= 0.77 && s.baseline.mean >= 0.51 &&
           s.baseline.mean <= 0.61;
      detail += " (gain " + fmt(100.0 * s.gain.mean, 1) + "%)";
    }
  }
  report(8, ok, sw.seconds(), 120, "MAJP/baseline per devices-per-group:" + detail);
}

void mechanism()
{
  Stopwatch   sw;
  std::size_t gains = 0, asym = 0;
  auto        rng   = make_rng(99);
  for (std::uint64_t trial = 0; trial < 1000; ++trial)
  {
    std::size_t const M = 3 + trial % 6;
    auto              r = testing::random_market(M, 5000 + trial, 3);
    MarketGame        truthful(r.devices, r.g, r.params);
    auto const        honest = majp_solve(truthful, 3, {}, trial);
    record_budget(honest);

    std::size_t const m    = std::uniform_int_distribution<std::size_t>(0, M - 1)(rng);
    int               lie  = std::uniform_int_distribution<int>(1, 2)(rng);
    lie                    = lie >= r.levels[m] ? lie + 1 : lie;
    auto devices           = r.devices;
    devices[m].dtype.level = lie;
    MarketGame reported(devices, r.g, r.params);
    auto const dishonest = majp_solve(reported, 3, {}, trial);
    record_budget(dishonest);
    for (auto const &c : dishonest.final_partition.coalitions)
    {
      if (std::find(c.members.begin(), c.members.end(), m) != c.members.end())
      {
        double const received = preference(truthful, m, c.members, c.type_level);
        gains += received > honest.final_prices[m] + 1e-12 ? 1 : 0;
      }
    }
  }
  for (std::uint64_t trial = 0; trial < 300; ++trial)
  {
    std::size_t const M = 3 + trial % 6;
    auto              r = testing::random_market(M, 9000 + trial);
    std::vector<std::size_t> perm(M);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    auto q = r;
    for (std::size_t i = 0; i < M; ++i)
    {
      q.devices[i] = r.devices[perm[i]];
      for (std::size_t j = 0; j < M; ++j)
      {
        q.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            r.g(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
      }
      if (!r.params.constraints.phi_thresholds.empty())
      {
        q.params.constraints.phi_thresholds[i] = r.params.constraints.phi_thresholds[perm[i]];
      }
    }
    MarketGame a(r.devices, r.g, r.params), b(q.devices, q.g, q.params);
    auto const ta = majp_solve(a, 2, {}, trial);
    auto const tb = majp_solve(b, 2, {}, trial);
    record_budget(ta);
    record_budget(tb);
    asym += std::abs(ta.final_value - tb.final_value) > 1e-9 * std::max(1.0, std::abs(ta.final_value)) ? 1 : 0;
  }
  report(9, budget_failures == 0 && gains == 0 && asym == 0, sw.seconds(), 30,
         "budget balance failures " + std::to_string(budget_failures) + "/" + std::to_string(budget_checks) +
             " solves, profitable misreports " + std::to_string(gains) +
             "/1000, relabeling value changes " + std::to_string(asym) + "/300");
}

void runtime_order()
{
  Stopwatch  sw;
  auto const rows = runtime_comparison(default_config(), {10, 12, 20, 40, 80}, 5, 3);
  bool       ok   = true;
  std::string detail;
  std::vector<RuntimeRow> growth;
  for (auto const &row : rows)
  {
    if (row.M == 10 || row.M == 12)
    {
      ok = ok && row.majp_ms < row.optimal_ms;
      detail += " M=" + std::to_string(row.M) + " " + fmt(row.majp_ms, 2) + " < " + fmt(row.optimal_ms, 2) + " ms;";
    }
    if (row.M != 12)
    {
      growth.push_back(row);
    }
  }
  double const slope = growth_exponent(growth);
  ok                 = ok && slope < 2.0;
  report(10, ok, sw.seconds(), 60, "median MAJP vs optimal:" + detail + " growth exponent " + fmt(slope, 3));
}

}  // namespace

int main()
{
  walkthrough();
  dominance();
  monotone_and_stable();
  correlation();
  table_two();
  leakage_algebra();
  depression();
  fig11_band();
  mechanism();
  runtime_order();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
