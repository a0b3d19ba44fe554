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

#include "datamarket/synthetic_data.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace datamarket {

struct ValuationParams
{
  double gamma{1.0};  // redundancy weight, >= 1
  double A0{0.2};
  double noise_mu{0.5};
  double noise_sigma{1.0};
  double b{0.1};  // pricing-shape weight
  double g{0.0};  // leakage factor in [0, 1]

  void validate() const;
};

// Cardinality valuation v(D) = |D| over unique ids.
double set_valuation(std::span<SampleId const> ids);

// gamma * v(Di n Dj) + v(Dj \ Di).
double conditional_valuation(std::span<SampleId const> held, std::span<SampleId const> offered,
                             double gamma);

// Noise floor clamp used by precision_zeta: [0, 1 - 1e-6].
double clamp_noise(double n0);

// 1 - A0 exp(-2 overlap (1 - n0)), n0 clamped first.
double precision_zeta(double overlap, double A0, double n0);

// Fixed increasing, log-concave map from precision to scaled valuation.
double scaled_valuation(double zeta);

std::vector<double> scaled_valuation_curve(double A0, bool with_noise,
                                           std::span<double const> overlaps, std::uint64_t seed,
                                           double noise_mu = 0.5, double noise_sigma = 1.0);

// V = 1/(1+g) [sum_i s_i^(1 - b p)]^(1/b).
double leakage_valuation(std::span<double const> shares, double g, double b, double p);

struct DepressionScenario
{
  std::vector<double> shares;         // market share of each seller
  std::vector<double> round_g;        // leakage factor per round, t0..tN
  std::size_t         late_seller{1};  // seller exposed to the round leakage
  double              b{0.1};
};

struct DepressionRow
{
  std::size_t round;
  double      price;
  std::size_t seller;
  double      g;
  double      value;
};

// Seller i's value at price p is s_i V(shares, g_i, b, p); the late seller
// sees round_g[t], everybody else trades before any leakage (g = 0).
std::vector<DepressionRow> value_depression_series(DepressionScenario const &scenario,
                                                   std::span<double const>   prices);

}  // namespace datamarket
