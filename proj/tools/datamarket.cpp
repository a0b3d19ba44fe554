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
#include "datamarket/csv.hpp"
#include "datamarket/errors.hpp"
#include "datamarket/experiments.hpp"
#include "datamarket/oracle.hpp"
#include "datamarket/random.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

using namespace datamarket;
namespace fs = std::filesystem;

namespace {

enum Exit : int
{
  kOk            = 0,
  kConfigError   = 1,
  kRuntimeError  = 2,
  kAssertFailure = 3,
};

struct Options
{
  std::string                  config;
  std::optional<std::uint64_t> seed;
  std::string                  out{"out"};
  std::string                  recipe;
  std::size_t                  runs{100};
  bool                         assert_checks{false};
};

MarketConfig load(Options const &o)
{
  return o.config.empty() ? default_config() : load_config(o.config);
}

fs::path prepare(Options const &o)
{
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

int finish(std::vector<std::string> const &checks, Options const &o)
{
  bool ok = true;
  for (auto const &c : checks)
  {
    std::printf("%s\n", c.c_str());
    ok = ok && c.rfind("PASS", 0) == 0;
  }
  return o.assert_checks && !ok ? kAssertFailure : kOk;
}

std::string verdict(bool ok, std::string const &what)
{
  return (ok ? "PASS " : "FAIL ") + what;
}

int cmd_discover(Options const &o)
{
  auto const          config = load(o);
  auto const          seed   = o.seed.value_or(config.seed);
  auto const          dir    = prepare(o);
  std::vector<DataType> types;
  if (config.scenario.kind == "walkthrough")
  {
    types.assign(4, DataType{});
  }
  else
  {
    for (auto const &d : build_market(config, seed).devices)
    {
      types.push_back(d.dtype);
    }
  }
  std::vector<DeviceProfile> devices(types.size());
  for (std::size_t m = 0; m < types.size(); ++m)
  {
    devices[m].id    = m;
    devices[m].dtype = types[m];
  }
  auto const found = discover_types(devices, config.K, config.unit_comm_cost, seed);
  for (std::size_t m = 0; m < types.size(); ++m)
  {
    types[m].level = found.levels[m];
  }
  write_csv(dir / "types.csv", type_table(types));
  CsvTable platform;
  platform.header = {"level", "devices"};
  for (std::size_t k = 0; k < found.platform.proxy_set_sizes.size(); ++k)
  {
    platform.rows.push_back({std::to_string(k + 1), std::to_string(found.platform.proxy_set_sizes[k])});
  }
  write_csv(dir / "platform.csv", platform);
  std::printf("discovered %zu devices in %zu rounds, communication cost %s\n", types.size(),
              found.platform.rounds, format_real(found.platform.comm_cost).c_str());
  return finish({}, o);
}

int cmd_solve(Options const &o)
{
  auto const config = load(o);
  auto const seed   = o.seed.value_or(config.seed);
  auto const dir    = prepare(o);
  auto const result = run_scenario(config, seed);
  write_csv(dir / "trace.csv", trace_table(result.trace));
  write_csv(dir / "summary.csv", summary_table(result.trace));
  if (!result.types.empty())
  {
    write_csv(dir / "types.csv", type_table(result.types));
  }
  emit_csv(result.cooperative, dir / "payoff_majp.csv");
  emit_csv(result.baseline, dir / "payoff_baseline.csv");

  std::printf("partition value %s after %zu switches, %zu coalitions\n",
              format_real(result.trace.final_value).c_str(), result.trace.iterations.size(),
              result.trace.final_partition.coalitions.size());
  std::printf("normalized average payoff: majp %s, baseline %s\n",
              format_real(result.cooperative.normalized_average).c_str(),
              format_real(result.baseline.normalized_average).c_str());

  bool monotone = true;
  for (auto const &row : result.trace.iterations)
  {
    monotone = monotone && row.value_after >= row.value_before;
  }
  double paid = 0.0;
  for (double p : result.trace.final_prices)
  {
    paid += p;
  }
  std::vector<std::string> checks{
      verdict(result.trace.converged, "solver converged" +
                                          (result.trace.failure.empty() ? "" : ": " + result.trace.failure)),
      verdict(monotone, "trace values non-decreasing"),
      verdict(std::abs(paid - result.trace.final_partition.total_budget) <= 1e-9, "budget balance")};
  return finish(checks, o);
}

int cmd_oracle(Options const &o)
{
  auto const config = load(o);
  auto const seed   = o.seed.value_or(config.seed);
  auto const M      = config.num_devices();
  if (M > oracle::kMaxDevices)
  {
    throw ConfigError("oracle supports at most " + std::to_string(oracle::kMaxDevices) + " devices, config has " +
                      std::to_string(M));
  }
  auto const dir = prepare(o);

  oracle::CoalitionWorth worth;
  SolveTrace             trace;
  std::optional<MarketInstance> market;
  std::vector<int>       levels;
  if (config.scenario.kind == "walkthrough")
  {
    static auto const game = walkthrough_game();
    worth                  = oracle::game_worth(game);
    trace                  = solve_hedonic(game, {config.max_iters}, seed);
  }
  else
  {
    market.emplace(build_market(config, seed));
    MarketGame game(market->devices, market->leakage.g_influence, market->params);
    trace  = majp_solve(game, config.K, {config.max_iters}, derive_seed(seed, 77));
    levels = trace.levels;
    worth  = oracle::market_worth(market->devices, market->leakage.g_influence, market->params, levels);
  }
  auto const   best    = oracle::optimal_partition(M, worth, std::thread::hardware_concurrency());
  auto const   blocks  = blocks_of(trace.final_partition);
  double const v       = oracle::canonical_value(blocks, worth);
  std::size_t  largest = 0;
  for (auto const &b : blocks)
  {
    largest = std::max(largest, b.size());
  }
  auto const check = oracle::ratio_bound_check(v, best.value, largest);

  CsvTable t;
  t.header = {"device_id", "optimal_block", "majp_block"};
  std::vector<std::size_t> opt_of(M), majp_of(M);
  for (std::size_t k = 0; k < best.partition.size(); ++k)
  {
    for (auto m : best.partition[k])
    {
      opt_of[m] = k;
    }
  }
  for (std::size_t k = 0; k < blocks.size(); ++k)
  {
    for (auto m : blocks[k])
    {
      majp_of[m] = k;
    }
  }
  for (std::size_t m = 0; m < M; ++m)
  {
    t.rows.push_back({std::to_string(m), std::to_string(opt_of[m]), std::to_string(majp_of[m])});
  }
  write_csv(dir / "oracle.csv", t);
  std::printf("optimal value %s over %zu partitions, majp value %s\n", format_real(best.value).c_str(),
              best.visited, format_real(v).c_str());
  if (!check.checked)
  {
    std::printf("%s\n", check.notice.c_str());
    return finish({}, o);
  }
  return finish({verdict(check.pass, "ratio " + format_real(check.ratio) + " <= H(" + std::to_string(largest) +
                                         ") = " + format_real(check.bound) + " and v(MAJP) <= v*")},
                o);
}

int cmd_experiment(Options const &o)
{
  auto const config = load(o);
  auto const dir    = prepare(o);
  auto const result = run_recipe(o.recipe, config, o.runs, o.seed.value_or(config.seed), dir);
  for (auto const &f : result.files)
  {
    std::printf("wrote %s\n", f.string().c_str());
  }
  return finish(result.checks, o);
}

int cmd_depression(Options const &o)
{
  auto const config = load(o);
  auto const dir    = prepare(o);
  auto const result = depression_recipe(config, dir);
  for (auto const &f : result.files)
  {
    std::printf("wrote %s\n", f.string().c_str());
  }
  return finish(result.checks, o);
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Data market simulator: coalition formation against information leakage"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App *sub, bool config_required, bool with_seed) {
    auto *c = sub->add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
    if (config_required)
    {
      c->required();
    }
    if (with_seed)
    {
      sub->add_option("--seed", o.seed, "random seed (defaults to market.seed)");
    }
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_flag("--assert", o.assert_checks, "exit with status 3 when a check fails");
  };

  auto *discover = app.add_subcommand("discover", "private type discovery only; writes types.csv");
  common(discover, true, true);
  auto *solve = app.add_subcommand("solve", "full coalition formation; writes trace and summary CSVs");
  common(solve, true, true);
  auto *orc = app.add_subcommand("oracle", "exhaustive optimum and ratio-bound verdict");
  common(orc, true, true);
  auto *experiment = app.add_subcommand("experiment", "figure reproduction recipes");
  common(experiment, false, true);
  experiment->add_option("--recipe", o.recipe, "recipe name")
      ->required()
      ->check(CLI::IsMember({"fig3", "fig7", "fig8", "fig9", "fig10", "fig11"}));
  experiment->add_option("--runs", o.runs, "Monte Carlo runs")->capture_default_str()->check(CLI::PositiveNumber);
  auto *dep = app.add_subcommand("depression", "value depression series");
  common(dep, true, false);

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try
  {
    if (*discover)
    {
      return cmd_discover(o);
    }
    if (*solve)
    {
      return cmd_solve(o);
    }
    if (*orc)
    {
      return cmd_oracle(o);
    }
    if (*experiment)
    {
      return cmd_experiment(o);
    }
    return cmd_depression(o);
  }
  catch (ConfigError const &e)
  {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  }
  catch (std::exception const &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
