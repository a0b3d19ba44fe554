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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace datamarket {

struct ModelParams
{
  Eigen::VectorXd w;
};

struct DataType
{
  double theta{0.0};
  double xi{0.0};
  double phi{0.0};
  int    level{1};
};

// Set function over unique, sorted row indices of one dataset.
using SetFunction = std::function<double(std::span<std::size_t const>)>;

double local_loss(ModelParams const &w, SellerDataset const &dataset);
double global_loss(ModelParams const &w, std::span<SellerDataset const> datasets);

// Gradient of the sample-weighted global squared loss.
Eigen::VectorXd global_gradient(ModelParams const &w, std::span<SellerDataset const> datasets);
Eigen::VectorXd local_gradient(ModelParams const &w, SellerDataset const &dataset);

// Full-batch gradient descent from a seeded N(0, 0.01^2) initialization.
ModelParams train(std::span<SellerDataset const> datasets, std::size_t steps,
                  double learning_rate, std::uint64_t seed);

// Gradient-norm contraction ratio on `reference` after one SGD epoch over the
// selected rows of `data`, starting at `baseline`; clipped to [0, 1].
double potential(SellerDataset const &data, std::span<std::size_t const> rows,
                 ModelParams const &baseline, std::span<SellerDataset const> reference,
                 double learning_rate);

// 1 - potential: zero on the empty set, larger for more informative subsets.
SetFunction performance_potential(SellerDataset const &data, ModelParams const &baseline,
                                  std::span<SellerDataset const> reference,
                                  double                         learning_rate);

struct MarginalEstimate
{
  double mean{0.0};
  double std_error{0.0};
};

// Monte Carlo E[J(D ∪ z) - J(D)], i ~ U{1..B}, D ~ n_rows^(i-1) with replacement.
MarginalEstimate marginal_contribution_stats(std::span<std::size_t const> z, std::size_t n_rows,
                                             std::size_t batch, std::size_t draws,
                                             std::uint64_t seed, SetFunction const &J);

double marginal_contribution(std::span<std::size_t const> z, std::size_t n_rows, std::size_t batch,
                             std::size_t draws, std::uint64_t seed, SetFunction const &J);

// Same estimator with z itself a uniformly drawn single row per draw.
MarginalEstimate average_marginal_contribution(std::size_t n_rows, std::size_t batch,
                                               std::size_t draws, std::uint64_t seed,
                                               SetFunction const &J);

// phi = xi * theta, level = floor(phi K) + 1 clamped to [1, K].
DataType data_type(double theta, double xi, int K);

// Per-device ||grad J_m(w) - grad J(w)||.
std::vector<double> gradient_dissimilarity(ModelParams const                &w,
                                           std::span<SellerDataset const> datasets);

struct TypeSignalModel
{
  double scale{1.0};
  double offset{0.0};
};

// Least-squares xi from S_k = scale xi + offset + noise; nullopt when a device
// has no observations.
std::vector<std::optional<double>> estimate_types(std::vector<std::vector<double>> const &signals,
                                                  TypeSignalModel const                  &model = {});

}  // namespace datamarket
