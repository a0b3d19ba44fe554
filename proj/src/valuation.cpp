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

#include "datamarket/valuation.hpp"

#include "datamarket/errors.hpp"
#include "datamarket/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace datamarket {

void ValuationParams::validate() const
{
  if (!(gamma >= 1.0))
  {
    throw DomainError("gamma must be >= 1");
  }
  if (!(A0 > 0.0 && A0 <= 1.0))
  {
    throw DomainError("A0 must lie in (0, 1]");
  }
  if (!(noise_sigma >= 0.0))
  {
    throw DomainError("noise_sigma must be non-negative");
  }
  if (!(b > 0.0))
  {
    throw DomainError("b must be positive");
  }
  if (!(g >= 0.0 && g <= 1.0))
  {
    throw DomainError("g must lie in [0, 1]");
  }
}

double set_valuation(std::span<SampleId const> ids)
{
  return static_cast<double>(std::set<SampleId>(ids.begin(), ids.end()).size());
}

double conditional_valuation(std::span<SampleId const> held, std::span<SampleId const> offered,
                             double gamma)
{
  if (!(gamma >= 1.0))
  {
    throw DomainError("gamma must be >= 1");
  }
  std::set<SampleId> const h(held.begin(), held.end());
  std::set<SampleId> const o(offered.begin(), offered.end());
  double                   common = 0.0;
  double                   fresh  = 0.0;
  for (auto id : o)
  {
    (h.count(id) ? common : fresh) += 1.0;
  }
  return gamma * common + fresh;
}

double clamp_noise(double n0)
{
  return std::clamp(n0, 0.0, 1.0 - 1e-6);
}

double precision_zeta(double overlap, double A0, double n0)
{
  if (!(overlap >= 0.0))
  {
    throw DomainError("overlap must be non-negative");
  }
  return 1.0 - A0 * std::exp(-2.0 * overlap * (1.0 - clamp_noise(n0)));
}

double scaled_valuation(double zeta)
{
  return std::log1p(std::numbers::e * zeta) / std::log1p(std::numbers::e) * 1.5;
}

std::vector<double> scaled_valuation_curve(double A0, bool with_noise,
                                           std::span<double const> overlaps, std::uint64_t seed,
                                           double noise_mu, double noise_sigma)
{
  if (!std::is_sorted(overlaps.begin(), overlaps.end()))
  {
    throw DomainError("overlaps must be sorted ascending");
  }
  Rng                              rng = make_rng(seed);
  std::normal_distribution<double> noise{noise_mu, noise_sigma};
  std::vector<double>              out;
  out.reserve(overlaps.size());
  for (double x : overlaps)
  {
    double const n0 = with_noise ? noise(rng) : 0.0;
    out.push_back(scaled_valuation(precision_zeta(x, A0, n0)));
  }
  return out;
}

double leakage_valuation(std::span<double const> shares, double g, double b, double p)
{
  if (shares.empty())
  {
    throw DomainError("leakage_valuation needs at least one share");
  }
  if (!(g >= 0.0 && g <= 1.0))
  {
    throw DomainError("leakage factor g must lie in [0, 1]");
  }
  if (!(b > 0.0) || !(p >= 0.0))
  {
    throw DomainError("leakage_valuation needs b > 0 and p >= 0");
  }
  double total = 0.0;
  for (double s : shares)
  {
    if (!(s >= 0.0))
    {
      throw DomainError("shares must be non-negative");
    }
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9)
  {
    throw DomainError("shares must sum to 1");
  }
  double const exponent = 1.0 - b * p;
  double       sum      = 0.0;
  for (double s : shares)
  {
    if (s == 0.0)
    {
      if (exponent <= 0.0)
      {
        throw DomainError("leakage_valuation: zero share raised to non-positive power (b*p >= 1)");
      }
      continue;
    }
    sum += std::pow(s, exponent);
  }
  return std::pow(sum, 1.0 / b) / (1.0 + g);
}

std::vector<DepressionRow> value_depression_series(DepressionScenario const &scenario,
                                                   std::span<double const>   prices)
{
  if (!std::is_sorted(prices.begin(), prices.end()))
  {
    throw DomainError("prices must be sorted ascending");
  }
  if (scenario.late_seller >= scenario.shares.size())
  {
    throw DomainError("late seller index out of range");
  }
  std::vector<DepressionRow> rows;
  for (std::size_t t = 0; t < scenario.round_g.size(); ++t)
  {
    for (double p : prices)
    {
      for (std::size_t i = 0; i < scenario.shares.size(); ++i)
      {
        double const g = i == scenario.late_seller ? scenario.round_g[t] : 0.0;
        double const v = scenario.shares[i] * leakage_valuation(scenario.shares, g, scenario.b, p);
        rows.push_back({t, p, i, g, v});
      }
    }
  }
  return rows;
}

}  // namespace datamarket
