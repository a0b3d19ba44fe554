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
#include "datamarket/valuation.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace datamarket {

struct ScenarioConfig
{
  std::string kind{"market"};  // "market" or "walkthrough"
  std::size_t groups{2};
  std::size_t devices_per_group{10};
  std::size_t samples_min{200};
  std::size_t samples_max{400};
  double      intra_correlation{0.6};
  double      cross_decay{0.6};  // groups k, l correlate at intra * decay^|k-l|
  std::vector<std::pair<double, double>> xi_bands{{0.1, 0.5}, {0.5, 0.9}};
  double      price_per_device{3.0};  // > 0 overrides total_budget with price * M
  double      label_noise{0.1};
};

struct LearnerConfig
{
  std::size_t batch{4};
  std::size_t draws{100};
  std::size_t train_steps{100};
  double      learning_rate{0.05};
  std::size_t reference_samples{64};
};

struct DepressionConfig
{
  std::vector<double> shares{0.6, 0.4};
  std::size_t         late_seller{1};
  double              price_min{1.0};
  double              price_max{10.0};
  double              price_step{0.5};
};

struct MarketConfig
{
  ValuationParams     valuation;
  std::vector<double> leakage_g{0.0, 0.25, 0.5, 0.75};
  double              total_budget{80.0};
  double              rho_max{kInf};
  double              coalition_cost_bound{kInf};
  double              phi_threshold{kInf};  // applied to every device
  double              delta{0.0};
  int                 K{2};
  std::size_t         d{3};
  double              unit_comm_cost{0.0};
  std::size_t         comm_rounds{1};
  std::size_t         max_iters{100000};
  std::uint64_t       seed{1};
  double              correlation_tol{5e-4};
  ScenarioConfig      scenario;
  LearnerConfig       learner;
  DepressionConfig    depression;

  void validate() const;

  std::size_t num_devices() const
  {
    return scenario.kind == "walkthrough" ? 4 : scenario.groups * scenario.devices_per_group;
  }
};

// Documented defaults: two groups of ten devices, the fig11 recipe setting.
MarketConfig default_config();

MarketConfig load_config(std::filesystem::path const &path);
MarketConfig parse_config(std::string const &text);

}  // namespace datamarket
