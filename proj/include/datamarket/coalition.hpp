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

#include "datamarket/learner.hpp"
#include "datamarket/leakage.hpp"
#include "datamarket/synthetic_data.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace datamarket {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DeviceProfile
{
  std::size_t           id{0};
  std::size_t           n_samples{0};
  std::vector<SampleId> sample_ids;  // sorted; empty means "disjoint from everybody"
  DataType              dtype;
  double                rho{0.0};
  bool                  a{true};
};

struct Coalition
{
  std::size_t              id{0};
  std::vector<std::size_t> members;  // sorted device indices
  int                      type_level{1};
  double                   budget{0.0};
};

struct Partition
{
  std::vector<Coalition> coalitions;
  double                 total_budget{0.0};
};

struct ConstraintSet
{
  double              rho_max{kInf};
  double              coalition_cost_bound{kInf};
  std::vector<double> phi_thresholds;  // empty means unbounded
};

struct MarketParams
{
  double        total_budget{1.0};
  std::size_t   comm_rounds{1};
  double        unit_comm_cost{0.0};
  ConstraintSet constraints;
};

struct CoalitionOutcome
{
  double                   value{0.0};
  bool                     feasible{true};
  std::vector<std::string> violations;
  std::vector<bool>        participation;  // aligned with members
  std::vector<double>      offered;        // offered price p_j(n_j), aligned with members
  std::vector<double>      payments;       // contract payments, aligned with members
  double                   leakage{0.0};   // mean influence across the coalition boundary
  double                   gain{0.0};      // f_S
};

// Payoffs of a coalition depend only on its own members.
class HedonicGame
{
public:
  virtual ~HedonicGame() = default;

  virtual std::size_t      size() const                                          = 0;
  virtual int              level(std::size_t m) const                            = 0;
  virtual CoalitionOutcome evaluate(std::span<std::size_t const> members) const = 0;

  // Stable identity of device m; the solver orders its random choices by it.
  virtual std::uint64_t key(std::size_t m) const
  {
    return m;
  }
};

// ---- pricing and value pieces ----

double proportional_price(double budget, std::size_t n_j, std::span<std::size_t const> member_counts);

// log(1 + phi_sum) / log(1 + market_size).
double group_gain(double phi_sum, std::size_t market_size);
double group_gain(std::span<std::size_t const> members, std::span<DeviceProfile const> devices,
                  std::vector<bool> const &participation, std::size_t market_size);

// Participation-weighted average of rho over the participants' sample counts.
double dissimilarity(std::span<std::size_t const> members, std::span<DeviceProfile const> devices,
                     std::vector<bool> const &participation);

// sum_j a_j [(p_j + f_S) - (p_j c_j + c_S)].
double coalition_value(std::span<double const> prices, std::span<double const> price_loss,
                       std::vector<bool> const &participation, double f_S, double c_S);

std::size_t union_count(std::span<std::size_t const> members, std::span<DeviceProfile const> devices);

class MarketGame : public HedonicGame
{
public:
  MarketGame(std::vector<DeviceProfile> devices, Eigen::MatrixXd g_influence, MarketParams params);

  std::size_t size() const override
  {
    return devices_.size();
  }
  int level(std::size_t m) const override
  {
    return levels_[m];
  }
  CoalitionOutcome evaluate(std::span<std::size_t const> members) const override;
  std::uint64_t    key(std::size_t m) const override
  {
    return devices_[m].id;
  }

  void set_levels(std::vector<int> levels);

  std::vector<DeviceProfile> const &devices() const
  {
    return devices_;
  }
  Eigen::MatrixXd const &influence() const
  {
    return g_;
  }
  MarketParams const &params() const
  {
    return params_;
  }
  double total_samples() const
  {
    return total_samples_;
  }

private:
  std::vector<DeviceProfile> devices_;
  Eigen::MatrixXd            g_;
  MarketParams               params_;
  std::vector<int>           levels_;
  std::vector<double>        row_sums_;
  double                     total_samples_{0.0};
  bool                       disjoint_{true};
  bool                       thresholds_active_{false};
};

// Explicit value table; members share the value equally.
class TabularGame : public HedonicGame
{
public:
  TabularGame(std::size_t players, std::map<std::vector<std::size_t>, double> values,
              std::vector<int> levels = {});

  std::size_t size() const override
  {
    return players_;
  }
  int level(std::size_t m) const override
  {
    return levels_[m];
  }
  CoalitionOutcome evaluate(std::span<std::size_t const> members) const override;

private:
  std::size_t                                players_;
  std::map<std::vector<std::size_t>, double> values_;
  std::vector<int>                           levels_;
};

// The 4-device example game: v({1,2}) = 1, v({1,3}) = 2, 0 otherwise
// (zero-based: {0,1} and {0,2}).
TabularGame walkthrough_game();

struct FeasibilityReport
{
  bool                     feasible{true};
  std::vector<std::string> violations;
};

// Optional reservation[i]: the best payoff already observed for member i.
FeasibilityReport feasible(HedonicGame const &game, std::span<std::size_t const> members,
                           std::map<std::size_t, double> const *reservation = nullptr);

// Value credited to a coalition inside a partition: 0 unless feasible and
// type-homogeneous.
double coalition_worth(HedonicGame const &game, std::span<std::size_t const> members,
                       CoalitionOutcome const &outcome);
double partition_value(HedonicGame const &game, std::vector<std::vector<std::size_t>> const &blocks);

// Contract payment to m in `members` (which must contain m) when the
// coalition is typed `type_level`; 0 on type mismatch or infeasibility.
double preference(HedonicGame const &game, std::size_t m, std::span<std::size_t const> members,
                  int type_level);

// ---- Phase I ----

struct PlatformView
{
  std::vector<std::size_t> proxy_set_sizes;  // aggregates only
  double                   comm_cost{0.0};
  std::size_t              rounds{0};
};

struct Discovery
{
  std::vector<int> levels;  // delivered privately, one per device
  PlatformView     platform;
};

// Trusted in-process broadcast; per-device levels never enter the platform view.
class PrivateChannel
{
public:
  PrivateChannel(int K, double unit_comm_cost);

  void        ping(std::size_t device, int level);
  Discovery   close(std::uint64_t seed);
  std::size_t rounds() const
  {
    return rounds_;
  }

private:
  int                                   K_;
  double                                unit_;
  std::size_t                           rounds_{0};
  std::vector<std::pair<std::size_t, int>> inbox_;
};

Discovery discover_types(std::span<DeviceProfile const> devices, int K, double unit_comm_cost,
                         std::uint64_t seed);

// ---- Phase II / III ----

struct TraceRow
{
  std::size_t iter;
  std::size_t device;
  std::size_t from_coalition;
  std::size_t to_coalition;
  double      value_before;
  double      value_after;
};

struct SolverOptions
{
  std::size_t max_iters{100000};
};

struct SolveTrace
{
  std::vector<TraceRow> iterations;
  Partition             final_partition;
  std::vector<double>   final_prices;
  std::vector<bool>     final_participation;
  std::vector<int>      levels;
  double                initial_value{0.0};
  double                final_value{0.0};
  double                comm_cost{0.0};
  std::size_t           passes{0};
  bool                  converged{true};
  std::string           failure;
};

struct SolverState
{
  std::vector<Coalition>        coalitions;
  std::vector<CoalitionOutcome> outcomes;
  std::vector<double>           worth;
  std::vector<std::size_t>      where;  // device -> coalition slot
  std::size_t                   next_id{0};
  std::size_t                   iter{0};

  double total() const;
};

SolverState singleton_state(HedonicGame const &game);

// One switch attempt: target == state.coalitions.size() means a fresh singleton.
bool switch_device(HedonicGame const &game, SolverState &state, std::size_t m, std::size_t target,
                   std::vector<TraceRow> *trace = nullptr);

SolveTrace solve_hedonic(HedonicGame const &game, SolverOptions const &options, std::uint64_t seed);

SolveTrace majp_solve(MarketGame &game, int K, SolverOptions const &options, std::uint64_t seed);

bool is_nash_stable(HedonicGame const &game, std::vector<Coalition> const &coalitions);

std::vector<std::vector<std::size_t>> blocks_of(Partition const &partition);

// Harmonic number H(n).
double harmonic(std::size_t n);

}  // namespace datamarket
