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

#include "datamarket/oracle.hpp"

#include "datamarket/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace datamarket::oracle {

std::size_t bell(std::size_t M)
{
  // Bell triangle
  std::vector<std::size_t> row{1};
  for (std::size_t i = 1; i <= M; ++i)
  {
    std::vector<std::size_t> next{row.back()};
    for (auto v : row)
    {
      next.push_back(next.back() + v);
    }
    row = std::move(next);
  }
  return row.front();
}

PartitionEnumeration::PartitionEnumeration(std::size_t M, std::vector<std::uint8_t> prefix)
  : M_{M}
  , fixed_{prefix.size()}
{
  if (M == 0 || M > kMaxDevices)
  {
    throw CapacityError("partition enumeration supports 1 <= M <= " + std::to_string(kMaxDevices) +
                        ", got " + std::to_string(M));
  }
  if (prefix.size() > M)
  {
    throw DomainError("prefix longer than the ground set");
  }
  a_.assign(M, 0);
  top_.assign(M, 1);
  for (std::size_t i = 0; i < prefix.size(); ++i)
  {
    std::uint8_t const limit = i == 0 ? 0 : top_[i - 1];
    if (prefix[i] > limit)
    {
      throw DomainError("prefix is not a restricted growth string");
    }
    a_[i]   = prefix[i];
    top_[i] = static_cast<std::uint8_t>(std::max<int>(i == 0 ? 1 : top_[i - 1], a_[i] + 1));
  }
  for (std::size_t i = std::max<std::size_t>(prefix.size(), 1); i < M; ++i)
  {
    top_[i] = top_[i - 1];
  }
}

std::size_t PartitionEnumeration::blocks() const
{
  return top_.back();
}

void PartitionEnumeration::next()
{
  for (std::size_t i = M_; i-- > std::max<std::size_t>(fixed_, 1);)
  {
    if (a_[i] < top_[i - 1])
    {
      ++a_[i];
      top_[i] = static_cast<std::uint8_t>(std::max<int>(top_[i - 1], a_[i] + 1));
      for (std::size_t j = i + 1; j < M_; ++j)
      {
        a_[j]   = 0;
        top_[j] = top_[j - 1];
      }
      return;
    }
  }
  done_ = true;
}

std::vector<std::vector<std::size_t>> PartitionEnumeration::partition() const
{
  std::vector<std::vector<std::size_t>> out(blocks());
  for (std::size_t i = 0; i < M_; ++i)
  {
    out[a_[i]].push_back(i);
  }
  return out;
}

std::vector<std::vector<std::size_t>> enumerate_partitions(std::size_t M)
{
  std::vector<std::vector<std::size_t>> labels;
  for (PartitionEnumeration e(M); !e.done(); e.next())
  {
    labels.emplace_back(e.current().begin(), e.current().end());
  }
  return labels;
}

double canonical_value(std::vector<std::vector<std::size_t>> blocks, CoalitionWorth const &worth)
{
  for (auto &b : blocks)
  {
    std::sort(b.begin(), b.end());
  }
  std::erase_if(blocks, [](auto const &b) { return b.empty(); });
  std::sort(blocks.begin(), blocks.end(),
            [](auto const &x, auto const &y) { return x.front() < y.front(); });
  double total = 0.0;
  for (auto const &b : blocks)
  {
    total += worth(b);
  }
  return total;
}

namespace {

struct ShardBest
{
  bool                      found{false};
  double                    value{0.0};
  std::size_t               blocks{0};
  std::vector<std::uint8_t> labels;
  std::size_t               visited{0};
};

bool better(double value, std::size_t blocks, ShardBest const &best)
{
  if (!best.found || value > best.value)
  {
    return true;
  }
  return value == best.value && blocks > best.blocks;
}

ShardBest run_shard(std::size_t M, std::vector<std::uint8_t> prefix,
                    std::vector<double> const &table)
{
  ShardBest                  best;
  std::vector<std::uint32_t> masks(M);
  for (PartitionEnumeration e(M, std::move(prefix)); !e.done(); e.next())
  {
    auto const &a      = e.current();
    auto const  blocks = e.blocks();
    std::fill(masks.begin(), masks.begin() + static_cast<std::ptrdiff_t>(blocks), 0U);
    for (std::size_t i = 0; i < M; ++i)
    {
      masks[a[i]] |= 1U << i;
    }
    double value = 0.0;
    for (std::size_t k = 0; k < blocks; ++k)
    {
      value += table[masks[k]];
    }
    ++best.visited;
    if (better(value, blocks, best))
    {
      best.found  = true;
      best.value  = value;
      best.blocks = blocks;
      best.labels = a;
    }
  }
  return best;
}

std::vector<std::vector<std::uint8_t>> prefixes(std::size_t M, std::size_t length)
{
  std::vector<std::vector<std::uint8_t>> out{{0}};
  for (std::size_t pos = 1; pos < std::min(M, length); ++pos)
  {
    std::vector<std::vector<std::uint8_t>> grown;
    for (auto const &p : out)
    {
      auto const top = *std::max_element(p.begin(), p.end()) + 1;
      for (int v = 0; v <= top; ++v)
      {
        auto q = p;
        q.push_back(static_cast<std::uint8_t>(v));
        grown.push_back(std::move(q));
      }
    }
    out = std::move(grown);
  }
  return out;
}

}  // namespace

OptimalResult optimal_partition(std::size_t M, CoalitionWorth const &worth, std::size_t workers)
{
  if (M == 0 || M > kMaxDevices)
  {
    throw CapacityError("optimal_partition: M = " + std::to_string(M) + " outside 1.." +
                        std::to_string(kMaxDevices));
  }
  std::vector<double>      table(std::size_t{1} << M, 0.0);
  std::vector<std::size_t> members;
  for (std::uint32_t mask = 1; mask < table.size(); ++mask)
  {
    members.clear();
    for (std::size_t i = 0; i < M; ++i)
    {
      if (mask & (1U << i))
      {
        members.push_back(i);
      }
    }
    table[mask] = worth(members);
  }

  auto const             shards = prefixes(M, workers > 1 ? 3 : 1);
  std::vector<ShardBest> results(shards.size());
  if (workers > 1)
  {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, shards.size()); ++w)
    {
      pool.emplace_back([&] {
        for (std::size_t k; (k = cursor++) < shards.size();)
        {
          results[k] = run_shard(M, shards[k], table);
        }
      });
    }
    for (auto &t : pool)
    {
      t.join();
    }
  }
  else
  {
    results[0] = run_shard(M, shards[0], table);
  }

  ShardBest best;
  std::size_t visited = 0;
  for (auto const &r : results)
  {
    visited += r.visited;
    if (r.found && better(r.value, r.blocks, best))
    {
      best = r;
    }
  }
  OptimalResult out;
  out.value   = best.value;
  out.visited = visited;
  out.partition.resize(best.blocks);
  for (std::size_t i = 0; i < M; ++i)
  {
    out.partition[best.labels[i]].push_back(i);
  }
  return out;
}

CoalitionWorth market_worth(std::vector<DeviceProfile> const &devices, Eigen::MatrixXd const &g,
                            MarketParams const &params, std::vector<int> const &levels)
{
  double total_n = 0.0;
  for (auto const &d : devices)
  {
    total_n += static_cast<double>(d.sample_ids.empty() ? d.n_samples : d.sample_ids.size());
  }
  return [&devices, &g, params, levels, total_n](std::span<std::size_t const> S) -> double {
    auto const N = devices.size();
    auto const s = S.size();
    if (s == 0)
    {
      return 0.0;
    }
    for (auto j : S)
    {
      if (levels[j] != levels[S[0]])
      {
        return 0.0;
      }
    }
    std::set<SampleId> ids;
    double             anonymous = 0.0;
    double             sum_n     = 0.0;
    std::vector<double> n(s);
    for (std::size_t k = 0; k < s; ++k)
    {
      auto const &d = devices[S[k]];
      n[k]          = static_cast<double>(d.sample_ids.empty() ? d.n_samples : d.sample_ids.size());
      sum_n += n[k];
      if (d.sample_ids.empty())
      {
        anonymous += n[k];
      }
      ids.insert(d.sample_ids.begin(), d.sample_ids.end());
    }
    double const budget = params.total_budget * (static_cast<double>(ids.size()) + anonymous) / total_n;

    double lambda = 0.0;
    if (s < N)
    {
      std::vector<bool> inside(N, false);
      for (auto j : S)
      {
        inside[j] = true;
      }
      double acc = 0.0;
      for (auto j : S)
      {
        for (std::size_t i = 0; i < N; ++i)
        {
          if (!inside[i])
          {
            acc += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          }
        }
      }
      lambda = acc / static_cast<double>(s * (N - s));
    }
    double const keep = 1.0 / (1.0 + lambda);
    double const c_S  = s > 1 ? static_cast<double>(s * params.comm_rounds) * params.unit_comm_cost : 0.0;

    std::vector<bool>   a(s, true);
    std::vector<double> bracket(s, 0.0);
    bool                stable = false;
    while (!stable)
    {
      double phi = 0.0;
      for (std::size_t k = 0; k < s; ++k)
      {
        phi += a[k] ? devices[S[k]].dtype.phi : 0.0;
      }
      double const f = std::log(1.0 + phi) / std::log(1.0 + static_cast<double>(N));
      stable         = true;
      for (std::size_t k = 0; k < s; ++k)
      {
        bracket[k] = budget * n[k] / sum_n * keep + f - c_S;
        if (a[k] && bracket[k] < 0.0)
        {
          a[k]   = false;
          stable = false;
        }
      }
    }

    double value = 0.0;
    double rho_w = 0.0;
    double n_a   = 0.0;
    for (std::size_t k = 0; k < s; ++k)
    {
      if (!a[k])
      {
        continue;
      }
      value += bracket[k];
      rho_w += devices[S[k]].rho * n[k];
      n_a += n[k];
    }
    if (n_a > 0.0 && rho_w / n_a > params.constraints.rho_max)
    {
      return 0.0;
    }
    if (c_S > params.constraints.coalition_cost_bound)
    {
      return 0.0;
    }
    auto const &th = params.constraints.phi_thresholds;
    if (!th.empty())
    {
      for (std::size_t k = 0; k < s; ++k)
      {
        double c = 0.0;
        for (std::size_t l = 0; l < s; ++l)
        {
          if (l != k && a[k] && a[l])
          {
            c += g(static_cast<Eigen::Index>(S[l]), static_cast<Eigen::Index>(S[k]));
          }
        }
        if (c > th[S[k]])
        {
          return 0.0;
        }
      }
    }
    return value;
  };
}

CoalitionWorth game_worth(HedonicGame const &game)
{
  return [&game](std::span<std::size_t const> S) {
    return coalition_worth(game, S, game.evaluate(S));
  };
}

RatioVerdict ratio_bound_check(double v_majp, double v_star, std::size_t max_coalition_size)
{
  RatioVerdict out;
  out.bound = harmonic(max_coalition_size);
  if (!(v_star > 0.0))
  {
    out.notice = "ratio bound skipped: optimal value is not positive";
    return out;
  }
  out.checked = true;
  out.ratio   = v_majp / v_star;
  out.pass    = out.ratio <= out.bound && v_majp <= v_star;
  return out;
}

double exact_marginal_contribution(std::span<std::size_t const> z, std::size_t n_rows,
                                   std::size_t batch, SetFunction const &J)
{
  if (batch == 0 || n_rows == 0)
  {
    throw DomainError("exact marginal contribution needs batch >= 1 and a non-empty dataset");
  }
  if (n_rows > 12)
  {
    throw CapacityError("exact marginal contribution enumerates at most 12 samples");
  }
  double work = 0.0;
  for (std::size_t i = 0; i < batch; ++i)
  {
    work += std::pow(static_cast<double>(n_rows), static_cast<double>(i));
  }
  if (work > 5e7)
  {
    throw CapacityError("exact marginal contribution: enumeration too large");
  }
  auto const canon = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  double total = 0.0;
  for (std::size_t i = 1; i <= batch; ++i)
  {
    std::size_t const        len = i - 1;
    std::vector<std::size_t> tuple(len, 0);
    double                   sum   = 0.0;
    double                   count = 0.0;
    while (true)
    {
      auto base = canon(tuple);
      auto with = tuple;
      with.insert(with.end(), z.begin(), z.end());
      sum += J(canon(with)) - J(base);
      count += 1.0;
      std::size_t k = 0;
      for (; k < len; ++k)
      {
        if (++tuple[k] < n_rows)
        {
          break;
        }
        tuple[k] = 0;
      }
      if (k == len)
      {
        break;
      }
    }
    total += sum / count;
  }
  return total / static_cast<double>(batch);
}

}  // namespace datamarket::oracle
