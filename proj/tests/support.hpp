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
#pragma once

#include "datamarket/coalition.hpp"
#include "datamarket/random.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace datamarket::testing {

struct RandomMarket
{
  std::vector<DeviceProfile> devices;
  Eigen::MatrixXd            g;
  MarketParams               params;
  std::vector<int>           levels;
};

// Small market with binding constraints in roughly half of the draws.
inline RandomMarket random_market(std::size_t M, std::uint64_t seed, int K = 2)
{
  auto                                   rng = make_rng(seed, 0x7e57);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int>     lvl(1, K);
  RandomMarket                           r;
  bool const                             overlap = u(rng) < 0.3;
  SampleId                               next    = 0;
  for (std::size_t m = 0; m < M; ++m)
  {
    DeviceProfile d;
    d.id        = m;
    d.n_samples = 20 + static_cast<std::size_t>(u(rng) * 80.0);
    if (overlap)
    {
      next = next > d.n_samples / 2 ? next - d.n_samples / 2 : 0;
      for (std::size_t k = 0; k < d.n_samples; ++k)
      {
        d.sample_ids.push_back(next++);
      }
    }
    d.dtype.theta = u(rng);
    d.dtype.xi    = u(rng);
    d.dtype.phi   = d.dtype.theta * d.dtype.xi;
    d.dtype.level = lvl(rng);
    d.rho         = u(rng);
    r.levels.push_back(d.dtype.level);
    r.devices.push_back(d);
  }
  auto const n = static_cast<Eigen::Index>(M);
  r.g          = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    for (Eigen::Index j = i + 1; j < n; ++j)
    {
      r.g(i, j) = r.g(j, i) = u(rng);
    }
  }
  r.params.total_budget   = 1.0 + 9.0 * u(rng);
  r.params.comm_rounds    = 1;
  r.params.unit_comm_cost = 0.05 * u(rng);
  if (u(rng) < 0.5)
  {
    r.params.constraints.rho_max              = 0.4 + 0.5 * u(rng);
    r.params.constraints.coalition_cost_bound = 0.02 + 0.1 * u(rng);
  }
  if (u(rng) < 0.3)
  {
    for (std::size_t m = 0; m < M; ++m)
    {
      r.params.constraints.phi_thresholds.push_back(0.5 + 2.0 * u(rng));
    }
  }
  return r;
}

}  // namespace datamarket::testing
