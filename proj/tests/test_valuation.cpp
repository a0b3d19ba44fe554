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

#include "datamarket/errors.hpp"
#include "datamarket/random.hpp"
#include "datamarket/valuation.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

using namespace datamarket;

TEST_CASE("set valuation counts unique ids")
{
  CHECK(set_valuation(std::vector<SampleId>{}) == 0.0);
  CHECK(set_valuation(std::vector<SampleId>{1, 2, 3, 4, 5}) == 5.0);
  CHECK(set_valuation(std::vector<SampleId>{1, 1, 2}) == 2.0);
  CHECK(set_valuation(std::vector<SampleId>{1, 2}) <= set_valuation(std::vector<SampleId>{1, 2, 3}));
}

TEST_CASE("set valuation monotone and additive on random pairs")
{
  auto                               rng = make_rng(11);
  std::uniform_int_distribution<int> id(0, 30), len(0, 12);
  for (int trial = 0; trial < 1000; ++trial)
  {
    std::set<SampleId> a, b;
    for (int k = len(rng); k > 0; --k)
    {
      a.insert(id(rng));
    }
    for (int k = len(rng); k > 0; --k)
    {
      b.insert(id(rng));
    }
    std::vector<SampleId> va(a.begin(), a.end()), vb(b.begin(), b.end()), inter, uni;
    std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(inter));
    std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(uni));
    REQUIRE(set_valuation(inter) <= set_valuation(va));
    REQUIRE(set_valuation(va) <= set_valuation(uni));
    REQUIRE(set_valuation(inter) <= set_valuation(va) + set_valuation(vb));
  }
}

TEST_CASE("conditional valuation set arithmetic")
{
  std::vector<SampleId> const five{1, 2, 3, 4, 5}, two{1, 2}, none{};
  CHECK(conditional_valuation(none, two, 1.0) == 2.0);
  CHECK(conditional_valuation(five, two, 1.0) == 2.0);
  CHECK(conditional_valuation(two, five, 1.0) == 5.0);
  CHECK(conditional_valuation(two, five, 2.0) == 7.0);
}

TEST_CASE("precision model")
{
  CHECK(precision_zeta(0.0, 0.2, 0.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(precision_zeta(1.0, 0.2, 0.0) == doctest::Approx(0.97293294335267746).epsilon(1e-14));
  CHECK(precision_zeta(50.0, 0.2, 0.0) == doctest::Approx(1.0));
  // A0 = 1 reaches zero only at zero overlap
  CHECK(precision_zeta(0.0, 1.0, 0.0) == 0.0);
  CHECK(precision_zeta(0.1, 1.0, 0.0) > 0.0);
  CHECK(clamp_noise(-3.0) == 0.0);
  CHECK(clamp_noise(2.0) == 1.0 - 1e-6);
  for (double A0 : {0.1, 0.5, 0.99})
  {
    for (double x = 0.0; x < 5.0; x += 0.25)
    {
      double const z = precision_zeta(x, A0, 0.3);
      CHECK(z > 0.0);
      CHECK(z <= 1.0);
      CHECK((precision_zeta(x + 1e-6, A0, 0.3) - z) / 1e-6 > 0.0);
    }
  }
}

TEST_CASE("scaled valuation curves")
{
  std::vector<double> xs;
  for (int k = 0; k <= 20; ++k)
  {
    xs.push_back(0.2 * k);
  }
  auto clean = scaled_valuation_curve(0.2, false, xs, 1);
  CHECK(clean == scaled_valuation_curve(0.2, false, xs, 99));
  CHECK(std::is_sorted(clean.begin(), clean.end()));
  auto high = scaled_valuation_curve(0.7, false, xs, 1);
  CHECK(high[0] < clean[0]);

  std::vector<double> noisy(xs.size(), 0.0);
  for (std::uint64_t s = 0; s < 200; ++s)
  {
    auto c = scaled_valuation_curve(0.2, true, xs, s);
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
      noisy[i] += c[i] / 200.0;
    }
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
  {
    CHECK(noisy[i] <= clean[i] + 1e-12);
  }
  CHECK(scaled_valuation(1.0) == doctest::Approx(1.5));
}

TEST_CASE("leakage valuation algebra")
{
  std::vector<double> const half{0.5, 0.5};
  CHECK(leakage_valuation(half, 0.0, 0.1, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(leakage_valuation(std::vector<double>{1.0}, 0.0, 0.1, 3.0) == doctest::Approx(1.0));
  std::vector<double> const shares{0.2, 0.3, 0.5};
  double const              v0 = leakage_valuation(shares, 0.0, 0.1, 2.0);
  CHECK(leakage_valuation(shares, 1.0, 0.1, 2.0) == doctest::Approx(v0 / 2.0).epsilon(1e-14));
  for (double g = 0.0; g <= 1.0; g += 0.05)
  {
    CHECK(std::abs(leakage_valuation(shares, g, 0.1, 2.0) * (1.0 + g) - v0) < 1e-12);
  }
  CHECK(leakage_valuation(shares, 0.3, 0.1, 2.0) < leakage_valuation(shares, 0.2, 0.1, 2.0));

  CHECK_THROWS_AS(leakage_valuation(std::vector<double>{1.0, 0.0}, 0.0, 0.1, 20.0), DomainError);
  CHECK_NOTHROW(leakage_valuation(std::vector<double>{1.0, 0.0}, 0.0, 0.1, 2.0));
  CHECK_THROWS_AS(leakage_valuation(std::vector<double>{0.4, 0.4}, 0.0, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(leakage_valuation(half, 1.5, 0.1, 1.0), DomainError);
}

TEST_CASE("params validation")
{
  ValuationParams p;
  CHECK_NOTHROW(p.validate());
  p.gamma = 0.5;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p   = {};
  p.b = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("value depression series ordering")
{
  std::vector<double> prices;
  for (double p = 1.0; p <= 10.0; p += 0.5)
  {
    prices.push_back(p);
  }
  DepressionScenario flat{{0.6, 0.4}, {0.0, 0.0, 0.0}, 1, 0.1};
  std::map<std::size_t, std::vector<double>> by_round;
  for (auto const &row : value_depression_series(flat, prices))
  {
    if (row.seller == 1)
    {
      by_round[row.round].push_back(row.value);
    }
  }
  CHECK(by_round[0] == by_round[1]);
  CHECK(by_round[1] == by_round[2]);

  DepressionScenario rising{{0.6, 0.4}, {0.0, 0.25, 0.5, 0.75}, 1, 0.1};
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> curves;
  for (auto const &row : value_depression_series(rising, prices))
  {
    curves[{row.seller, row.round}].push_back(row.value);
  }
  for (std::size_t t = 1; t < 4; ++t)
  {
    auto const &prev = curves[{1, t - 1}];
    auto const &cur  = curves[{1, t}];
    for (std::size_t i = 0; i < prices.size(); ++i)
    {
      CHECK(cur[i] < prev[i]);
    }
    CHECK(curves[{0, t}] == curves[{0, 0}]);
  }
  for (auto const &[key, curve] : curves)
  {
    CHECK(std::adjacent_find(curve.begin(), curve.end(), std::greater_equal<>()) == curve.end());
  }
  // s_2 V(g) with V from the closed form.
  double const base = std::pow(std::pow(0.6, 0.9) + std::pow(0.4, 0.9), 10.0);
  CHECK(curves[{1, 3}][0] == doctest::Approx(0.4 * base / 1.75).epsilon(1e-12));
}
