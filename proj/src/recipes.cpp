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

#include "datamarket/csv.hpp"
#include "datamarket/errors.hpp"
#include "datamarket/experiments.hpp"
#include "datamarket/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace datamarket {
namespace {

void check(RecipeResult &r, bool ok, std::string const &what)
{
  r.checks.push_back((ok ? "PASS " : "FAIL ") + what);
  r.pass = r.pass && ok;
}

std::string fixed(double x, int digits = 4)
{
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

RecipeResult fig3(MarketConfig const &config, std::size_t runs, std::uint64_t seed,
                  std::filesystem::path const &out)
{
  RecipeResult        r;
  std::vector<double> overlaps;
  for (int k = 0; k <= 20; ++k)
  {
    overlaps.push_back(0.2 * k);
  }
  CsvTable t;
  t.header = {"A0", "noise", "overlap", "value"};
  std::map<double, std::vector<double>> clean;
  for (double A0 : {0.2, 0.7})
  {
    clean[A0] = scaled_valuation_curve(A0, false, overlaps, seed);
    std::vector<double> noisy(overlaps.size(), 0.0);
    for (std::size_t s = 0; s < std::max<std::size_t>(runs, 1); ++s)
    {
      auto const c = scaled_valuation_curve(A0, true, overlaps, seed + s, config.valuation.noise_mu,
                                            config.valuation.noise_sigma);
      for (std::size_t i = 0; i < c.size(); ++i)
      {
        noisy[i] += c[i] / static_cast<double>(std::max<std::size_t>(runs, 1));
      }
    }
    bool monotone = std::is_sorted(clean[A0].begin(), clean[A0].end());
    bool below    = true;
    for (std::size_t i = 0; i < overlaps.size(); ++i)
    {
      t.rows.push_back({format_real(A0), "0", format_real(overlaps[i]), format_real(clean[A0][i])});
      t.rows.push_back({format_real(A0), "1", format_real(overlaps[i]), format_real(noisy[i])});
      below = below && noisy[i] <= clean[A0][i];
    }
    check(r, monotone, "fig3 noiseless curve non-decreasing in overlap, A0=" + fixed(A0, 1));
    check(r, below, "fig3 noisy mean at or below noiseless curve, A0=" + fixed(A0, 1));
  }
  check(r, clean[0.7][0] < clean[0.2][0], "fig3 A0=0.7 below A0=0.2 at zero overlap");
  r.files.push_back(out / "fig3.csv");
  write_csv(r.files.back(), t);
  return r;
}

RecipeResult fig7(MarketConfig const &config, std::uint64_t seed, std::filesystem::path const &out)
{
  RecipeResult r;
  auto const   run = three_seller_convergence(40'000'000, seed, config.correlation_tol);
  CsvTable     t;
  t.header = {"round", "r_xy", "r_xz", "r_yz"};
  for (auto const &c : run.checkpoints)
  {
    t.rows.push_back({std::to_string(c.round), format_real(c.r_xy), format_real(c.r_xz),
                      format_real(c.r_yz)});
  }
  double const xz = 0.5 / std::sqrt(1.25);
  double const yz = 1.0 / std::sqrt(1.25);
  auto const  &m  = run.leakage;
  check(r, std::abs(m.r(0, 2) - xz) < config.correlation_tol,
        "fig7 r_XZ=" + fixed(m.r(0, 2), 6) + " within tol of " + fixed(xz, 6));
  check(r, std::abs(m.r(1, 2) - yz) < config.correlation_tol,
        "fig7 r_YZ=" + fixed(m.r(1, 2), 6) + " within tol of " + fixed(yz, 6));
  check(r, m.rounds_to_converge[0][2] != kNotConverged && m.rounds_to_converge[1][2] != kNotConverged,
        "fig7 convergence rounds recorded (XZ " + std::to_string(m.rounds_to_converge[0][2]) +
            ", YZ " + std::to_string(m.rounds_to_converge[1][2]) + ")");
  r.files.push_back(out / "fig7.csv");
  write_csv(r.files.back(), t);
  return r;
}

std::vector<double> price_grid(DepressionConfig const &d)
{
  std::vector<double> prices;
  for (double p = d.price_min; p <= d.price_max + 1e-9; p += d.price_step)
  {
    prices.push_back(std::min(p, d.price_max));
  }
  return prices;
}

}  // namespace

RecipeResult depression_recipe(MarketConfig const &config, std::filesystem::path const &out)
{
  RecipeResult       r;
  DepressionScenario sc{config.depression.shares, config.leakage_g, config.depression.late_seller,
                        config.valuation.b};
  auto const         prices = price_grid(config.depression);
  auto const         rows   = value_depression_series(sc, prices);
  CsvTable           t;
  t.header = {"round", "price", "seller", "g", "value"};
  // curve[round][seller] over prices
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> curve;
  for (auto const &row : rows)
  {
    t.rows.push_back({std::to_string(row.round), format_real(row.price), std::to_string(row.seller),
                      format_real(row.g), format_real(row.value)});
    curve[{row.round, row.seller}].push_back(row.value);
  }
  auto const late     = config.depression.late_seller;
  bool       ordered  = true;
  bool       rising   = true;
  for (auto const &[key, values] : curve)
  {
    rising = rising && std::adjacent_find(values.begin(), values.end(), std::greater_equal<>()) ==
                           values.end();
    if (key.second == late && key.first > 0)
    {
      auto const &prev = curve[{key.first - 1, late}];
      for (std::size_t i = 0; i < values.size(); ++i)
      {
        ordered = ordered && values[i] <= prev[i];
      }
    }
  }
  check(r, ordered, "fig8 late seller curve non-increasing across rounds");
  check(r, rising, "fig8 every curve strictly increasing in price");
  r.files.push_back(out / "fig8.csv");
  write_csv(r.files.back(), t);
  return r;
}

namespace {

RecipeResult fig9(MarketConfig const &config, std::size_t runs, std::uint64_t seed,
                  std::filesystem::path const &out)
{
  RecipeResult r;
  MarketConfig cfg = config;
  cfg.scenario.groups            = 5;
  cfg.scenario.devices_per_group = 6;
  cfg.K                          = 5;
  cfg.scenario.xi_bands          = {{0.0, 0.2}, {0.2, 0.4}, {0.4, 0.6}, {0.6, 0.8}, {0.8, 1.0}};
  int const K                    = cfg.K;

  // sum of normalized utility per (own level, grid point)
  std::size_t const                   points = 21;
  std::vector<std::vector<double>>    sum(static_cast<std::size_t>(K), std::vector<double>(points, 0.0));
  std::vector<std::vector<double>>    raw(static_cast<std::size_t>(K), std::vector<double>(points, 0.0));
  std::vector<double>                 count(static_cast<std::size_t>(K), 0.0);
  for (std::size_t s = 0; s < std::max<std::size_t>(runs, 1); ++s)
  {
    auto const market = build_market(cfg, seed + s);
    MarketGame game(market.devices, market.leakage.g_influence, market.params);
    auto const trace = majp_solve(game, K, {cfg.max_iters}, seed + s);
    for (auto const &c : trace.final_partition.coalitions)
    {
      for (auto m : c.members)
      {
        // payment in the coalition of each level: own coalition pays the
        // contract, any other level pays 0; a report between two levels
        // lands in either with the corresponding probability
        std::vector<double> at(static_cast<std::size_t>(K) + 1, 0.0);
        at[static_cast<std::size_t>(game.level(m))] = trace.final_prices[m];
        double const peak = trace.final_prices[m];
        if (!(peak > 0.0))
        {
          continue;
        }
        auto const own = static_cast<std::size_t>(game.level(m) - 1);
        count[own] += 1.0;
        for (std::size_t k = 0; k < points; ++k)
        {
          double const x    = 1.0 + 0.2 * static_cast<double>(k);
          auto const   lo   = static_cast<std::size_t>(std::floor(x));
          double const frac = x - static_cast<double>(lo);
          double const u    = (1.0 - frac) * at[lo] + (frac > 0.0 ? frac * at[lo + 1] : 0.0);
          sum[own][k] += u / peak;
          raw[own][k] += u;
        }
      }
    }
  }
  CsvTable t;
  t.header = {"own_level", "preferred_partition", "normalized_utility", "mean_payment"};
  bool shape = true;
  for (int level = 1; level <= K; ++level)
  {
    auto const own = static_cast<std::size_t>(level - 1);
    if (count[own] == 0.0)
    {
      continue;
    }
    std::size_t best = 0;
    for (std::size_t k = 0; k < points; ++k)
    {
      double const u = sum[own][k] / count[own];
      t.rows.push_back({std::to_string(level), format_real(1.0 + 0.2 * static_cast<double>(k)),
                        format_real(u), format_real(raw[own][k] / count[own])});
      if (u > sum[own][best] / count[own])
      {
        best = k;
      }
    }
    double const peak_x = 1.0 + 0.2 * static_cast<double>(best);
    bool         decays = true;
    for (std::size_t k = 1; k < points; ++k)
    {
      double const x = 1.0 + 0.2 * static_cast<double>(k);
      double const a = sum[own][k - 1];
      double const b = sum[own][k];
      decays         = decays && (x <= peak_x ? b >= a : b <= a);
    }
    shape = shape && std::abs(peak_x - level) < 1e-9 && decays;
  }
  check(r, shape, "fig9 normalized utility peaks at own type and decays away");
  r.files.push_back(out / "fig9.csv");
  write_csv(r.files.back(), t);
  return r;
}

RecipeResult fig10(MarketConfig const &config, std::uint64_t seed, std::filesystem::path const &out)
{
  RecipeResult r;
  auto const   rows = runtime_comparison(config, {6, 8, 10, 12, 20, 40, 80}, 5, seed);
  CsvTable     t;
  t.header = {"M", "majp_ms", "optimal_ms"};
  std::vector<RuntimeRow> growth;
  for (auto const &row : rows)
  {
    t.rows.push_back({std::to_string(row.M), format_real(row.majp_ms),
                      std::isnan(row.optimal_ms) ? "" : format_real(row.optimal_ms)});
    if (row.M == 10 || row.M == 12)
    {
      check(r, row.majp_ms < row.optimal_ms,
            "fig10 M=" + std::to_string(row.M) + " majp " + fixed(row.majp_ms, 3) + " ms < optimal " +
                fixed(row.optimal_ms, 3) + " ms");
    }
    if (row.M == 10 || row.M == 20 || row.M == 40 || row.M == 80)
    {
      growth.push_back(row);
    }
  }
  double const slope = growth_exponent(growth);
  check(r, slope < 2.0, "fig10 majp log-log growth exponent " + fixed(slope, 3) + " < 2");
  r.files.push_back(out / "fig10.csv");
  write_csv(r.files.back(), t);
  return r;
}

RecipeResult fig11(MarketConfig const &config, std::size_t runs, std::uint64_t seed,
                   std::filesystem::path const &out)
{
  RecipeResult r;
  CsvTable     t;
  t.header = {"devices_per_group", "majp_mean", "majp_se", "baseline_mean", "baseline_se",
              "gap",               "gap_se",    "gain",    "majp_raw",      "baseline_raw",
              "coalitions"};
  double last_gap = -1e300;
  bool   widening = true;
  for (std::size_t per_group : {10, 20, 30, 40})
  {
    MarketConfig cfg                = config;
    cfg.scenario.devices_per_group = per_group;
    auto const s                    = monte_carlo(cfg, runs, seed);
    t.rows.push_back({std::to_string(per_group), format_real(s.cooperative.mean),
                      format_real(s.cooperative.std_error), format_real(s.baseline.mean),
                      format_real(s.baseline.std_error), format_real(s.gap.mean),
                      format_real(s.gap.std_error), format_real(s.gain.mean),
                      format_real(s.cooperative_raw.mean), format_real(s.baseline_raw.mean),
                      format_real(s.coalitions.mean)});
    check(r, s.cooperative.mean > s.baseline.mean,
          "fig11 M=" + std::to_string(per_group) + " majp " + fixed(s.cooperative.mean) + " > baseline " +
              fixed(s.baseline.mean));
    if (per_group == 40)
    {
      check(r, s.cooperative.mean >= 0.67 && s.cooperative.mean <= 0.77,
            "fig11 M=40 majp " + fixed(s.cooperative.mean) + " in [0.67, 0.77]");
      check(r, s.baseline.mean >= 0.51 && s.baseline.mean <= 0.61,
            "fig11 M=40 baseline " + fixed(s.baseline.mean) + " in [0.51, 0.61]");
    }
    widening = widening && s.gap.mean >= last_gap;
    last_gap = s.gap.mean;
  }
  check(r, widening, "fig11 gap non-decreasing in M");
  r.files.push_back(out / "fig11.csv");
  write_csv(r.files.back(), t);
  return r;
}

}  // namespace

RecipeResult run_recipe(std::string const &name, MarketConfig const &config, std::size_t runs,
                        std::uint64_t seed, std::filesystem::path const &out_dir)
{
  std::filesystem::create_directories(out_dir);
  if (name == "fig3")
  {
    return fig3(config, runs, seed, out_dir);
  }
  if (name == "fig7")
  {
    return fig7(config, seed, out_dir);
  }
  if (name == "fig8")
  {
    return depression_recipe(config, out_dir);
  }
  if (name == "fig9")
  {
    return fig9(config, runs, seed, out_dir);
  }
  if (name == "fig10")
  {
    return fig10(config, seed, out_dir);
  }
  if (name == "fig11")
  {
    return fig11(config, runs, seed, out_dir);
  }
  throw ConfigError("unknown recipe '" + name + "'");
}

}  // namespace datamarket
