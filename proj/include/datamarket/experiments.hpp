#pragma once
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
#include "datamarket/leakage.hpp"
#include "datamarket/learner.hpp"
#include "datamarket/synthetic_data.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace datamarket {

struct MarketInstance
{
  std::vector<SellerDataset> datasets;
  std::vector<DeviceProfile> devices;
  std::vector<std::size_t>   group;  // generating group of each device
  LeakageMatrix              leakage;
  MarketParams               params;
  ModelParams                model;  // learner model after training on all data
};

MarketParams   market_params(MarketConfig const &config, std::size_t num_devices);
MarketInstance build_market(MarketConfig const &config, std::uint64_t seed);

struct LeakageSummary
{
  double      mean_abs_r{0.0};
  double      mean_g{0.0};
  std::size_t max_rounds{0};
  std::size_t unconverged_pairs{0};
};

struct MetricsReport
{
  std::string                   strategy;
  std::vector<double>           payoff;
  double                        average_payoff{0.0};
  double                        scale{1.0};  // normalizer: max payoff seen in the scenario
  double                        normalized_average{0.0};
  std::vector<std::size_t>      coalition_sizes;
  LeakageSummary                leakage;
  std::map<std::string, double> runtime_ms;
  std::vector<double>           value_trace;

  void set_payoff(std::vector<double> p, double normalizer);
};

LeakageSummary summarize(LeakageMatrix const &leakage);

// Each device trades alone against the learner's leakage-depressed valuation.
MetricsReport baseline_noncooperative(MarketInstance const &market, MarketConfig const &config);

struct ScenarioResult
{
  MetricsReport         cooperative;
  MetricsReport         baseline;
  SolveTrace            trace;
  std::vector<DataType> types;
};

ScenarioResult run_scenario(MarketConfig const &config, std::uint64_t seed);

struct Aggregate
{
  double mean{0.0};
  double std_error{0.0};
};

Aggregate aggregate(std::vector<double> const &values);

struct MonteCarloSummary
{
  std::size_t runs{0};
  Aggregate   cooperative;  // normalized average payoff
  Aggregate   baseline;
  Aggregate   gap;   // cooperative - baseline
  Aggregate   gain;  // cooperative / baseline - 1
  Aggregate   cooperative_raw;
  Aggregate   baseline_raw;
  Aggregate   coalitions;
};

// Seeds base_seed .. base_seed + n_runs - 1; workers = 0 uses every core.
MonteCarloSummary monte_carlo(MarketConfig const &config, std::size_t n_runs,
                              std::uint64_t base_seed, std::size_t workers = 0);

struct RuntimeRow
{
  std::size_t M;
  double      majp_ms;
  double      optimal_ms;  // NaN above the oracle cap
};

// Groups of about ten devices, one type level per group.
MarketConfig runtime_config(MarketConfig base, std::size_t M);

std::vector<RuntimeRow> runtime_comparison(MarketConfig const &config,
                                           std::vector<std::size_t> const &Ms,
                                           std::size_t reps, std::uint64_t seed);

// Least-squares slope of log(ms) against log(M).
double growth_exponent(std::vector<RuntimeRow> const &rows);

struct StreamCheckpoint
{
  std::size_t round;
  double      r_xy;
  double      r_xz;
  double      r_yz;
};

struct ConvergenceRun
{
  LeakageMatrix                 leakage;
  std::vector<StreamCheckpoint> checkpoints;
};

// X, Y ~ N(0, 1), Z = 0.5 X + Y streamed for `rounds` rounds.
ConvergenceRun three_seller_convergence(std::size_t rounds, std::uint64_t seed, double tol);

void emit_csv(MetricsReport const &report, std::filesystem::path const &path);

struct RecipeResult
{
  std::vector<std::filesystem::path> files;
  std::vector<std::string>           checks;  // "PASS ..." / "FAIL ..."
  bool                               pass{true};
};

// Value-depression series for the configured shares and leakage schedule.
RecipeResult depression_recipe(MarketConfig const &config, std::filesystem::path const &out_dir);

RecipeResult run_recipe(std::string const &name, MarketConfig const &config, std::size_t runs,
                        std::uint64_t seed, std::filesystem::path const &out_dir);

}  // namespace datamarket
