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

#include "datamarket/errors.hpp"
#include "datamarket/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace datamarket {
namespace {

double strict_margin(double x)
{
  return 1e-12 * std::max(1.0, std::abs(x));
}

bool homogeneous(HedonicGame const &game, std::span<std::size_t const> members)
{
  for (auto m : members)
  {
    if (game.level(m) != game.level(members.front()))
    {
      return false;
    }
  }
  return true;
}

double payment_of(CoalitionOutcome const &outcome, std::span<std::size_t const> members,
                  std::size_t m)
{
  auto it = std::lower_bound(members.begin(), members.end(), m);
  if (it == members.end() || *it != m)
  {
    throw DomainError("device " + std::to_string(m) + " is not a member of the coalition");
  }
  return outcome.payments[static_cast<std::size_t>(it - members.begin())];
}

double preference_from(HedonicGame const &game, std::size_t m, std::span<std::size_t const> members,
                       int type_level, CoalitionOutcome const &outcome)
{
  if (members.empty() || game.level(m) != type_level || !outcome.feasible ||
      !homogeneous(game, members))
  {
    return 0.0;
  }
  return payment_of(outcome, members, m);
}

}  // namespace

double proportional_price(double budget, std::size_t n_j, std::span<std::size_t const> member_counts)
{
  if (member_counts.empty())
  {
    throw DomainError("proportional_price needs at least one member");
  }
  auto const total = std::accumulate(member_counts.begin(), member_counts.end(), std::size_t{0});
  if (total == 0)
  {
    throw DomainError("proportional_price: zero union sample count");
  }
  return budget * static_cast<double>(n_j) / static_cast<double>(total);
}

double group_gain(double phi_sum, std::size_t market_size)
{
  if (market_size == 0)
  {
    throw DomainError("group_gain: empty market");
  }
  return std::log1p(std::max(0.0, phi_sum)) / std::log1p(static_cast<double>(market_size));
}

double group_gain(std::span<std::size_t const> members, std::span<DeviceProfile const> devices,
                  std::vector<bool> const &participation, std::size_t market_size)
{
  double sum = 0.0;
  for (std::size_t k = 0; k < members.size(); ++k)
  {
    if (participation[k])
    {
      sum += devices[members[k]].dtype.phi;
    }
  }
  return group_gain(sum, market_size);
}

double dissimilarity(std::span<std::size_t const> members, std::span<DeviceProfile const> devices,
                     std::vector<bool> const &participation)
{
  double weighted = 0.0;
  double total    = 0.0;
  for (std::size_t k = 0; k < members.size(); ++k)
  {
    if (participation[k])
    {
      auto const &d = devices[members[k]];
      weighted += d.rho * static_cast<double>(d.n_samples);
      total += static_cast<double>(d.n_samples);
    }
  }
  return total > 0.0 ? weighted / total : 0.0;
}

double coalition_value(std::span<double const> prices, std::span<double const> price_loss,
                       std::vector<bool> const &participation, double f_S, double c_S)
{
  double v = 0.0;
  for (std::size_t j = 0; j < prices.size(); ++j)
  {
    if (participation[j])
    {
      v += (prices[j] + f_S) - (prices[j] * price_loss[j] + c_S);
    }
  }
  return v;
}

std::size_t union_count(std::span<std::size_t const> members, std::span<DeviceProfile const> devices)
{
  std::set<SampleId> ids;
  std::size_t        anonymous = 0;
  for (auto m : members)
  {
    auto const &d = devices[m];
    if (d.sample_ids.empty())
    {
      anonymous += d.n_samples;
    }
    else
    {
      ids.insert(d.sample_ids.begin(), d.sample_ids.end());
    }
  }
  return ids.size() + anonymous;
}

// ---- MarketGame ----

MarketGame::MarketGame(std::vector<DeviceProfile> devices, Eigen::MatrixXd g_influence,
                       MarketParams params)
  : devices_{std::move(devices)}
  , g_{std::move(g_influence)}
  , params_{std::move(params)}
{
  auto const n = devices_.size();
  if (n == 0)
  {
    throw DomainError("market needs at least one device");
  }
  if (static_cast<std::size_t>(g_.rows()) != n || static_cast<std::size_t>(g_.cols()) != n)
  {
    throw DomainError("influence matrix must be M x M");
  }
  if (!(params_.total_budget >= 0.0) || !(params_.unit_comm_cost >= 0.0))
  {
    throw DomainError("budget and communication cost must be non-negative");
  }
  auto const &th = params_.constraints.phi_thresholds;
  if (!th.empty() && th.size() != n)
  {
    throw DomainError("phi_thresholds must have one entry per device");
  }
  thresholds_active_ =
      std::any_of(th.begin(), th.end(), [](double t) { return std::isfinite(t); });

  std::set<SampleId> seen;
  for (auto &d : devices_)
  {
    if (d.rho < 0.0)
    {
      throw DomainError("dissimilarity rho must be non-negative");
    }
    if (!d.sample_ids.empty())
    {
      std::sort(d.sample_ids.begin(), d.sample_ids.end());
      d.n_samples = d.sample_ids.size();
      for (auto id : d.sample_ids)
      {
        disjoint_ = seen.insert(id).second && disjoint_;
      }
    }
    if (d.n_samples == 0)
    {
      throw DomainError("device " + std::to_string(d.id) + " has no samples");
    }
    total_samples_ += static_cast<double>(d.n_samples);
    levels_.push_back(d.dtype.level);
  }
  row_sums_.resize(n);
  for (std::size_t j = 0; j < n; ++j)
  {
    row_sums_[j] = g_.row(static_cast<Eigen::Index>(j)).sum() -
                   g_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  }
}

void MarketGame::set_levels(std::vector<int> levels)
{
  if (levels.size() != devices_.size())
  {
    throw DomainError("one level per device expected");
  }
  levels_ = std::move(levels);
}

CoalitionOutcome MarketGame::evaluate(std::span<std::size_t const> members) const
{
  CoalitionOutcome out;
  auto const       s = members.size();
  if (s == 0)
  {
    return out;
  }
  auto const n = devices_.size();

  std::vector<std::size_t> counts(s);
  for (std::size_t k = 0; k < s; ++k)
  {
    counts[k] = devices_[members[k]].n_samples;
  }
  double const united = disjoint_ ? static_cast<double>(std::accumulate(
                                        counts.begin(), counts.end(), std::size_t{0}))
                                  : static_cast<double>(union_count(members, devices_));
  double const budget = params_.total_budget * united / total_samples_;
  out.offered.resize(s);
  for (std::size_t k = 0; k < s; ++k)
  {
    out.offered[k] = proportional_price(budget, counts[k], counts);
  }

  double lambda = 0.0;
  if (s < n)
  {
    double boundary = 0.0;
    for (std::size_t k = 0; k < s; ++k)
    {
      auto const j = static_cast<Eigen::Index>(members[k]);
      boundary += row_sums_[members[k]];
      for (std::size_t l = 0; l < s; ++l)
      {
        if (l != k)
        {
          boundary -= g_(j, static_cast<Eigen::Index>(members[l]));
        }
      }
    }
    lambda = std::max(0.0, boundary / (static_cast<double>(s) * static_cast<double>(n - s)));
  }
  out.leakage             = lambda;
  double const            loss = lambda / (1.0 + lambda);
  std::vector<double>     losses(s, loss);
  double const            c_S = coalition_cost(s, params_.comm_rounds, params_.unit_comm_cost);

  out.participation.assign(s, true);
  for (bool changed = true; changed;)
  {
    changed  = false;
    out.gain = group_gain(members, devices_, out.participation, n);
    for (std::size_t k = 0; k < s; ++k)
    {
      double const bracket = (out.offered[k] + out.gain) - (out.offered[k] * loss + c_S);
      if (out.participation[k] && bracket < 0.0)
      {
        out.participation[k] = false;
        changed              = true;
      }
    }
  }
  out.value = coalition_value(out.offered, losses, out.participation, out.gain, c_S);

  std::vector<std::size_t> active_counts;
  for (std::size_t k = 0; k < s; ++k)
  {
    if (out.participation[k])
    {
      active_counts.push_back(counts[k]);
    }
  }
  out.payments.assign(s, 0.0);
  double paid = 0.0;
  for (std::size_t k = 0; k < s; ++k)
  {
    if (out.participation[k])
    {
      out.payments[k] = proportional_price(out.value, counts[k], active_counts);
      paid += out.payments[k];
    }
  }

  if (std::abs(paid - out.value) > 1e-9 * std::max(1.0, std::abs(out.value)))
  {
    out.violations.push_back("budget balance: member payments do not sum to the coalition budget");
  }
  for (std::size_t k = 0; k < s; ++k)
  {
    if (out.participation[k] && out.payments[k] < 0.0)
    {
      out.violations.push_back("individual rationality: negative valuation for device " + std::to_string(members[k]));
    }
  }
  double const rho_S = dissimilarity(members, devices_, out.participation);
  if (rho_S > params_.constraints.rho_max)
  {
    out.violations.push_back("dissimilarity: rho above rho_max");
  }
  if (c_S > params_.constraints.coalition_cost_bound)
  {
    out.violations.push_back("cost bound: coalition cost above bound");
  }
  if (thresholds_active_)
  {
    for (std::size_t k = 0; k < s; ++k)
    {
      if (!out.participation[k])
      {
        continue;
      }
      double c = 0.0;
      for (std::size_t l = 0; l < s; ++l)
      {
        if (l != k && out.participation[l])
        {
          c += g_(static_cast<Eigen::Index>(members[l]), static_cast<Eigen::Index>(members[k]));
        }
      }
      if (c > params_.constraints.phi_thresholds[members[k]])
      {
        out.violations.push_back("opportunity threshold: cost above threshold for device " +
                                 std::to_string(members[k]));
      }
    }
  }
  out.feasible = out.violations.empty();
  return out;
}

// ---- TabularGame ----

TabularGame::TabularGame(std::size_t players, std::map<std::vector<std::size_t>, double> values,
                         std::vector<int> levels)
  : players_{players}
  , levels_{std::move(levels)}
{
  if (levels_.empty())
  {
    levels_.assign(players_, 1);
  }
  if (levels_.size() != players_)
  {
    throw DomainError("one level per player expected");
  }
  for (auto &[key, v] : values)
  {
    auto sorted = key;
    std::sort(sorted.begin(), sorted.end());
    values_[sorted] = v;
  }
}

CoalitionOutcome TabularGame::evaluate(std::span<std::size_t const> members) const
{
  CoalitionOutcome out;
  if (members.empty())
  {
    return out;
  }
  std::vector<std::size_t> key(members.begin(), members.end());
  auto                     it = values_.find(key);
  out.value                   = it == values_.end() ? 0.0 : it->second;
  out.participation.assign(members.size(), true);
  out.offered.assign(members.size(), 0.0);
  out.payments.assign(members.size(), out.value / static_cast<double>(members.size()));
  return out;
}

TabularGame walkthrough_game()
{
  return TabularGame(4, {{{0, 1}, 1.0}, {{0, 2}, 2.0}});
}

// ---- feasibility, worth, preference ----

FeasibilityReport feasible(HedonicGame const &game, std::span<std::size_t const> members,
                           std::map<std::size_t, double> const *reservation)
{
  auto const        outcome = game.evaluate(members);
  FeasibilityReport report{outcome.feasible, outcome.violations};
  if (reservation)
  {
    for (std::size_t k = 0; k < members.size(); ++k)
    {
      auto it = reservation->find(members[k]);
      if (it != reservation->end() && outcome.payments[k] < it->second)
      {
        report.violations.push_back("reservation: payoff below an already visited alternative for device " +
                                    std::to_string(members[k]));
        report.feasible = false;
      }
    }
  }
  return report;
}

double coalition_worth(HedonicGame const &game, std::span<std::size_t const> members,
                       CoalitionOutcome const &outcome)
{
  if (members.empty() || !outcome.feasible || !homogeneous(game, members))
  {
    return 0.0;
  }
  return outcome.value;
}

double partition_value(HedonicGame const &game, std::vector<std::vector<std::size_t>> const &blocks)
{
  double total = 0.0;
  for (auto const &b : blocks)
  {
    total += coalition_worth(game, b, game.evaluate(b));
  }
  return total;
}

double preference(HedonicGame const &game, std::size_t m, std::span<std::size_t const> members,
                  int type_level)
{
  if (members.empty() || game.level(m) != type_level)
  {
    return 0.0;
  }
  return preference_from(game, m, members, type_level, game.evaluate(members));
}

// ---- Phase I ----

PrivateChannel::PrivateChannel(int K, double unit_comm_cost)
  : K_{K}
  , unit_{unit_comm_cost}
{
  if (K < 1)
  {
    throw DomainError("at least one proxy type set is required");
  }
  if (!(unit_comm_cost >= 0.0))
  {
    throw DomainError("unit communication cost must be non-negative");
  }
}

void PrivateChannel::ping(std::size_t device, int level)
{
  if (level < 1 || level > K_)
  {
    throw DomainError("device " + std::to_string(device) + " reported a level outside 1..K");
  }
  inbox_.emplace_back(device, level);
  ++rounds_;
}

Discovery PrivateChannel::close(std::uint64_t seed)
{
  std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(K_));
  std::size_t                           highest = 0;
  for (auto const &[device, level] : inbox_)
  {
    sets[static_cast<std::size_t>(level - 1)].push_back(device);
    highest = std::max(highest, device + 1);
  }
  Rng rng = make_rng(seed);
  for (auto &s : sets)
  {
    std::shuffle(s.begin(), s.end(), rng);
  }
  Discovery out;
  out.levels.assign(highest, 0);
  for (std::size_t k = 0; k < sets.size(); ++k)
  {
    for (auto device : sets[k])
    {
      out.levels[device] = static_cast<int>(k) + 1;
    }
    out.platform.proxy_set_sizes.push_back(sets[k].size());
  }
  out.platform.rounds    = rounds_;
  out.platform.comm_cost = static_cast<double>(rounds_) * unit_;
  inbox_.clear();
  return out;
}

Discovery discover_types(std::span<DeviceProfile const> devices, int K, double unit_comm_cost,
                         std::uint64_t seed)
{
  PrivateChannel channel(K, unit_comm_cost);
  for (std::size_t m = 0; m < devices.size(); ++m)
  {
    channel.ping(m, devices[m].dtype.level);
  }
  auto out = channel.close(seed);
  out.levels.resize(devices.size(), 0);
  return out;
}

// ---- solver ----

double SolverState::total() const
{
  double t = 0.0;
  for (double w : worth)
  {
    t += w;
  }
  return t;
}

SolverState singleton_state(HedonicGame const &game)
{
  SolverState s;
  auto const  n = game.size();
  for (std::size_t m = 0; m < n; ++m)
  {
    Coalition c{m, {m}, game.level(m), 0.0};
    auto      outcome = game.evaluate(c.members);
    s.worth.push_back(coalition_worth(game, c.members, outcome));
    s.outcomes.push_back(std::move(outcome));
    s.coalitions.push_back(std::move(c));
    s.where.push_back(m);
  }
  s.next_id = n;
  return s;
}

bool switch_device(HedonicGame const &game, SolverState &state, std::size_t m, std::size_t target,
                   std::vector<TraceRow> *trace)
{
  auto const from  = state.where[m];
  bool const fresh = target == state.coalitions.size();
  if (target == from || target > state.coalitions.size())
  {
    return false;
  }
  auto const &source = state.coalitions[from];
  if (fresh && source.members.size() == 1)
  {
    return false;
  }
  if (!fresh && state.coalitions[target].members.empty())
  {
    return false;
  }
  int const to_level = fresh ? game.level(m) : state.coalitions[target].type_level;
  double const current =
      preference_from(game, m, source.members, source.type_level, state.outcomes[from]);

  std::vector<std::size_t> joined;
  if (!fresh)
  {
    joined = state.coalitions[target].members;
  }
  joined.insert(std::upper_bound(joined.begin(), joined.end(), m), m);

  CoalitionOutcome joined_outcome;
  double           proposed = 0.0;
  if (game.level(m) == to_level)
  {
    joined_outcome = game.evaluate(joined);
    proposed       = preference_from(game, m, joined, to_level, joined_outcome);
  }
  if (!(proposed > current + strict_margin(current)))
  {
    return false;
  }

  std::vector<std::size_t> left = source.members;
  left.erase(std::find(left.begin(), left.end(), m));
  CoalitionOutcome left_outcome = left.empty() ? CoalitionOutcome{} : game.evaluate(left);
  double const     left_worth   = coalition_worth(game, left, left_outcome);
  double const     joined_worth = coalition_worth(game, joined, joined_outcome);

  double before = 0.0;
  double after  = 0.0;
  for (std::size_t k = 0; k < state.worth.size(); ++k)
  {
    before += state.worth[k];
    after += k == from ? left_worth : (k == target ? joined_worth : state.worth[k]);
  }
  if (fresh)
  {
    after += joined_worth;
  }
  if (!(after >= before))
  {
    return false;
  }

  auto const from_id = source.id;
  state.coalitions[from].members = std::move(left);
  state.outcomes[from]           = std::move(left_outcome);
  state.worth[from]              = left_worth;
  std::size_t to_id              = 0;
  if (fresh)
  {
    to_id = state.next_id++;
    state.coalitions.push_back(Coalition{to_id, std::move(joined), to_level, 0.0});
    state.outcomes.push_back(std::move(joined_outcome));
    state.worth.push_back(joined_worth);
  }
  else
  {
    to_id                            = state.coalitions[target].id;
    state.coalitions[target].members = std::move(joined);
    state.outcomes[target]           = std::move(joined_outcome);
    state.worth[target]              = joined_worth;
  }
  state.where[m] = target;
  ++state.iter;
  if (trace)
  {
    trace->push_back({state.iter, m, from_id, to_id, before, after});
  }
  return true;
}

namespace {

void finalize(HedonicGame const &game, SolverState const &state, SolveTrace &trace)
{
  auto const n = game.size();
  trace.final_prices.assign(n, 0.0);
  trace.final_participation.assign(n, false);
  trace.final_partition = {};
  for (std::size_t k = 0; k < state.coalitions.size(); ++k)
  {
    auto const &c = state.coalitions[k];
    if (c.members.empty())
    {
      continue;
    }
    Coalition out = c;
    out.budget    = state.worth[k];
    if (state.outcomes[k].feasible && homogeneous(game, c.members))
    {
      for (std::size_t i = 0; i < c.members.size(); ++i)
      {
        trace.final_prices[c.members[i]]        = state.outcomes[k].payments[i];
        trace.final_participation[c.members[i]] = state.outcomes[k].participation[i];
      }
    }
    trace.final_partition.total_budget += out.budget;
    trace.final_partition.coalitions.push_back(std::move(out));
  }
  trace.final_value = trace.final_partition.total_budget;
  trace.levels.resize(n);
  for (std::size_t m = 0; m < n; ++m)
  {
    trace.levels[m] = game.level(m);
  }
}

}  // namespace

SolveTrace solve_hedonic(HedonicGame const &game, SolverOptions const &options, std::uint64_t seed)
{
  if (game.size() == 0)
  {
    throw DomainError("solver needs at least one device");
  }
  if (options.max_iters == 0)
  {
    throw DomainError("max_iters must be at least 1");
  }
  SolveTrace  trace;
  SolverState state   = singleton_state(game);
  trace.initial_value = state.total();

  Rng                      rng = make_rng(seed);
  std::vector<std::size_t> order(game.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return game.key(x) < game.key(y); });
  std::vector<std::size_t> candidates;
  auto const               anchor = [&](std::size_t slot) {
    if (slot == state.coalitions.size())
    {
      return std::numeric_limits<std::uint64_t>::max();
    }
    std::uint64_t k = std::numeric_limits<std::uint64_t>::max();
    for (auto m : state.coalitions[slot].members)
    {
      k = std::min(k, game.key(m));
    }
    return k;
  };

  for (bool moved = true; moved;)
  {
    moved = false;
    if (++trace.passes > options.max_iters)
    {
      trace.converged = false;
      trace.failure   = "pass limit reached before a stable partition";
      break;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (auto m : order)
    {
      auto const from = state.where[m];
      candidates.clear();
      for (std::size_t k = 0; k < state.coalitions.size(); ++k)
      {
        if (k != from && !state.coalitions[k].members.empty() &&
            state.coalitions[k].type_level == game.level(m))
        {
          candidates.push_back(k);
        }
      }
      if (state.coalitions[from].members.size() > 1)
      {
        candidates.push_back(state.coalitions.size());
      }
      std::sort(candidates.begin(), candidates.end(),
                [&](std::size_t x, std::size_t y) { return anchor(x) < anchor(y); });
      std::shuffle(candidates.begin(), candidates.end(), rng);
      for (auto target : candidates)
      {
        if (switch_device(game, state, m, target, &trace.iterations))
        {
          moved = true;
          break;
        }
      }
      if (trace.iterations.size() > options.max_iters)
      {
        trace.converged = false;
        trace.failure   = "switch limit (max_iters) exceeded";
        moved           = false;
        break;
      }
    }
  }
  finalize(game, state, trace);
  return trace;
}

SolveTrace majp_solve(MarketGame &game, int K, SolverOptions const &options, std::uint64_t seed)
{
  auto discovery = discover_types(game.devices(), K, game.params().unit_comm_cost,
                                  derive_seed(seed, 0x1001));
  game.set_levels(discovery.levels);
  auto trace      = solve_hedonic(game, options, derive_seed(seed, 0x2002));
  trace.comm_cost = discovery.platform.comm_cost;
  return trace;
}

bool is_nash_stable(HedonicGame const &game, std::vector<Coalition> const &coalitions)
{
  for (std::size_t k = 0; k < coalitions.size(); ++k)
  {
    auto const &own = coalitions[k];
    for (auto m : own.members)
    {
      double const current = preference(game, m, own.members, own.type_level);
      auto const   better  = [&](double p) { return p > current + strict_margin(current); };
      for (std::size_t l = 0; l < coalitions.size(); ++l)
      {
        if (l == k || coalitions[l].members.empty())
        {
          continue;
        }
        auto joined = coalitions[l].members;
        joined.insert(std::upper_bound(joined.begin(), joined.end(), m), m);
        if (better(preference(game, m, joined, coalitions[l].type_level)))
        {
          return false;
        }
      }
      if (own.members.size() > 1)
      {
        std::size_t const alone[1]{m};
        if (better(preference(game, m, alone, game.level(m))))
        {
          return false;
        }
      }
    }
  }
  return true;
}

std::vector<std::vector<std::size_t>> blocks_of(Partition const &partition)
{
  std::vector<std::vector<std::size_t>> out;
  for (auto const &c : partition.coalitions)
  {
    out.push_back(c.members);
  }
  return out;
}

double harmonic(std::size_t n)
{
  double h = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
  {
    h += 1.0 / static_cast<double>(i);
  }
  return h;
}

}  // namespace datamarket
