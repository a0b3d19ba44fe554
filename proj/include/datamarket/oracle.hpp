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
#include "datamarket/learner.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace datamarket::oracle {

inline constexpr std::size_t kMaxDevices = 13;

std::size_t bell(std::size_t M);

// Restricted growth strings a[0..M-1] with a[0] = 0 and a[i] <= max(a[0..i-1]) + 1.
class PartitionEnumeration
{
public:
  explicit PartitionEnumeration(std::size_t M, std::vector<std::uint8_t> prefix = {});

  bool done() const
  {
    return done_;
  }
  std::vector<std::uint8_t> const &current() const
  {
    return a_;
  }
  std::size_t blocks() const;
  void        next();

  std::vector<std::vector<std::size_t>> partition() const;

private:
  std::size_t               M_;
  std::size_t               fixed_;
  std::vector<std::uint8_t> a_;
  std::vector<std::uint8_t> top_;  // top_[i] = max(a[0..i]) + 1
  bool                      done_{false};
};

std::vector<std::vector<std::size_t>> enumerate_partitions(std::size_t M);

using CoalitionWorth = std::function<double(std::span<std::size_t const>)>;

struct OptimalResult
{
  std::vector<std::vector<std::size_t>> partition;
  double                                value{0.0};
  std::size_t                           visited{0};
};

// Partition value summed over blocks in restricted-growth order (blocks
// sorted by smallest member).
double canonical_value(std::vector<std::vector<std::size_t>> blocks, CoalitionWorth const &worth);

// Exhaustive argmax; ties go to more blocks, then to the first partition in
// restricted-growth order. `workers` > 1 shards on the first three positions.
OptimalResult optimal_partition(std::size_t M, CoalitionWorth const &worth, std::size_t workers = 1);

// Coalition worth of the market game, written independently of MarketGame.
CoalitionWorth market_worth(std::vector<DeviceProfile> const &devices, Eigen::MatrixXd const &g,
                            MarketParams const &params, std::vector<int> const &levels);

CoalitionWorth game_worth(HedonicGame const &game);

struct RatioVerdict
{
  bool        checked{false};
  bool        pass{false};
  double      ratio{0.0};
  double      bound{0.0};
  std::string notice;
};

RatioVerdict ratio_bound_check(double v_majp, double v_star, std::size_t max_coalition_size);

// Exact E[J(D ∪ z) - J(D)] over i ~ U{1..B}, D ~ rows^(i-1).
double exact_marginal_contribution(std::span<std::size_t const> z, std::size_t n_rows,
                                   std::size_t batch, SetFunction const &J);

}  // namespace datamarket::oracle
