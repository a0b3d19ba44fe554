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

#include "datamarket/errors.hpp"
#include "datamarket/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace datamarket {
namespace {

void check_dim(ModelParams const &w, SellerDataset const &ds)
{
  if (static_cast<Eigen::Index>(ds.dim()) != w.w.size())
  {
    throw DomainError("feature dimension mismatch on device " + std::to_string(ds.device_id) +
                      ": model has " + std::to_string(w.w.size()) + ", data has " +
                      std::to_string(ds.dim()));
  }
}

std::vector<std::size_t> unique_sorted(std::vector<std::size_t> v)
{
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double local_loss(ModelParams const &w, SellerDataset const &dataset)
{
  if (dataset.size() == 0)
  {
    throw DomainError("local_loss: empty dataset");
  }
  check_dim(w, dataset);
  Eigen::VectorXd const r = dataset.features * w.w - dataset.labels;
  return r.squaredNorm() / static_cast<double>(dataset.size());
}

double global_loss(ModelParams const &w, std::span<SellerDataset const> datasets)
{
  double total = 0.0;
  double n     = 0.0;
  for (auto const &ds : datasets)
  {
    auto const nm = static_cast<double>(ds.size());
    total += nm * local_loss(w, ds);
    n += nm;
  }
  if (n == 0.0)
  {
    throw DomainError("global_loss: no data");
  }
  return total / n;
}

Eigen::VectorXd local_gradient(ModelParams const &w, SellerDataset const &dataset)
{
  if (dataset.size() == 0)
  {
    throw DomainError("local_gradient: empty dataset");
  }
  check_dim(w, dataset);
  Eigen::VectorXd const r = dataset.features * w.w - dataset.labels;
  return 2.0 * dataset.features.transpose() * r / static_cast<double>(dataset.size());
}

Eigen::VectorXd global_gradient(ModelParams const &w, std::span<SellerDataset const> datasets)
{
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.w.size());
  double          n    = 0.0;
  for (auto const &ds : datasets)
  {
    auto const nm = static_cast<double>(ds.size());
    grad += nm * local_gradient(w, ds);
    n += nm;
  }
  if (n == 0.0)
  {
    throw DomainError("global_gradient: no data");
  }
  return grad / n;
}

ModelParams train(std::span<SellerDataset const> datasets, std::size_t steps,
                  double learning_rate, std::uint64_t seed)
{
  if (datasets.empty())
  {
    throw DomainError("train: no datasets");
  }
  auto const                       d   = static_cast<Eigen::Index>(datasets.front().dim());
  Rng                              rng = make_rng(seed);
  std::normal_distribution<double> init{0.0, 0.01};
  ModelParams                      model{Eigen::VectorXd(d)};
  for (Eigen::Index k = 0; k < d; ++k)
  {
    model.w[k] = init(rng);
  }
  for (std::size_t step = 0; step < steps; ++step)
  {
    model.w -= learning_rate * global_gradient(model, datasets);
    if (!model.w.allFinite() || !std::isfinite(global_loss(model, datasets)))
    {
      throw NumericError("train diverged at step " + std::to_string(step + 1));
    }
  }
  return model;
}

double potential(SellerDataset const &data, std::span<std::size_t const> rows,
                 ModelParams const &baseline, std::span<SellerDataset const> reference,
                 double learning_rate)
{
  if (!baseline.w.allFinite())
  {
    throw DomainError("potential: baseline model is not finite");
  }
  double const before = global_gradient(baseline, reference).norm();
  if (before == 0.0)
  {
    return 0.0;
  }
  auto const subset = unique_sorted({rows.begin(), rows.end()});
  if (subset.empty())
  {
    return 1.0;
  }
  check_dim(baseline, data);
  Eigen::VectorXd w = baseline.w;
  for (auto row : subset)
  {
    if (row >= data.size())
    {
      throw DomainError("potential: row index out of range");
    }
    auto const      r = static_cast<Eigen::Index>(row);
    Eigen::VectorXd x = data.features.row(r).transpose();
    w -= learning_rate * 2.0 * (x.dot(w) - data.labels[r]) * x;
  }
  double const after = global_gradient(ModelParams{w}, reference).norm();
  double const eps   = after / before;
  if (!std::isfinite(eps))
  {
    return 1.0;
  }
  return std::clamp(eps, 0.0, 1.0);
}

SetFunction performance_potential(SellerDataset const &data, ModelParams const &baseline,
                                  std::span<SellerDataset const> reference,
                                  double                         learning_rate)
{
  return [&data, baseline, reference, learning_rate](std::span<std::size_t const> rows) {
    return 1.0 - potential(data, rows, baseline, reference, learning_rate);
  };
}

namespace {

MarginalEstimate run_draws(std::size_t draws, std::uint64_t seed,
                           std::function<double(Rng &)> const &one)
{
  if (draws == 0)
  {
    throw DomainError("marginal contribution needs at least one draw");
  }
  double sum  = 0.0;
  double sum2 = 0.0;
  for (std::size_t k = 0; k < draws; ++k)
  {
    Rng          rng = make_rng(seed, k);
    double const x   = one(rng);
    sum += x;
    sum2 += x * x;
  }
  double const n    = static_cast<double>(draws);
  double const mean = sum / n;
  double       se   = 0.0;
  if (draws > 1)
  {
    double const var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
    se               = std::sqrt(var / n);
  }
  return {mean, se};
}

double one_marginal(std::span<std::size_t const> z, std::size_t n_rows, std::size_t batch,
                    SetFunction const &J, Rng &rng)
{
  std::uniform_int_distribution<std::size_t> pick_i{1, batch};
  std::size_t const                          size = pick_i(rng) - 1;
  std::vector<std::size_t>                   d;
  d.reserve(size + z.size());
  if (size > 0)
  {
    std::uniform_int_distribution<std::size_t> pick_row{0, n_rows - 1};
    for (std::size_t k = 0; k < size; ++k)
    {
      d.push_back(pick_row(rng));
    }
  }
  auto const base = unique_sorted(d);
  d.insert(d.end(), z.begin(), z.end());
  auto const with = unique_sorted(d);
  return J(with) - J(base);
}

void check_marginal_args(std::size_t n_rows, std::size_t batch)
{
  if (batch == 0)
  {
    throw DomainError("batch size must be at least 1");
  }
  if (n_rows == 0)
  {
    throw DomainError("marginal contribution on an empty dataset");
  }
}

}  // namespace

MarginalEstimate marginal_contribution_stats(std::span<std::size_t const> z, std::size_t n_rows,
                                             std::size_t batch, std::size_t draws,
                                             std::uint64_t seed, SetFunction const &J)
{
  check_marginal_args(n_rows, batch);
  return run_draws(draws, seed,
                   [&](Rng &rng) { return one_marginal(z, n_rows, batch, J, rng); });
}

double marginal_contribution(std::span<std::size_t const> z, std::size_t n_rows, std::size_t batch,
                             std::size_t draws, std::uint64_t seed, SetFunction const &J)
{
  return marginal_contribution_stats(z, n_rows, batch, draws, seed, J).mean;
}

MarginalEstimate average_marginal_contribution(std::size_t n_rows, std::size_t batch,
                                               std::size_t draws, std::uint64_t seed,
                                               SetFunction const &J)
{
  check_marginal_args(n_rows, batch);
  return run_draws(draws, seed, [&](Rng &rng) {
    std::uniform_int_distribution<std::size_t> pick{0, n_rows - 1};
    std::size_t const                          z[1]{pick(rng)};
    return one_marginal(z, n_rows, batch, J, rng);
  });
}

DataType data_type(double theta, double xi, int K)
{
  if (K < 1)
  {
    throw DomainError("K must be at least 1");
  }
  if (!(xi >= 0.0 && xi <= 1.0))
  {
    throw DomainError("privacy preference xi must lie in [0, 1]");
  }
  DataType t;
  t.theta = theta;
  t.xi    = xi;
  t.phi   = std::clamp(xi * theta, 0.0, 1.0);
  t.level = std::clamp(static_cast<int>(std::floor(t.phi * K)) + 1, 1, K);
  return t;
}

std::vector<double> gradient_dissimilarity(ModelParams const                &w,
                                           std::span<SellerDataset const> datasets)
{
  Eigen::VectorXd const global = global_gradient(w, datasets);
  std::vector<double>   out;
  out.reserve(datasets.size());
  for (auto const &ds : datasets)
  {
    out.push_back((local_gradient(w, ds) - global).norm());
  }
  return out;
}

std::vector<std::optional<double>> estimate_types(std::vector<std::vector<double>> const &signals,
                                                  TypeSignalModel const                  &model)
{
  if (model.scale == 0.0)
  {
    throw DomainError("type signal model needs a non-zero scale");
  }
  std::vector<std::optional<double>> out(signals.size());
  for (std::size_t m = 0; m < signals.size(); ++m)
  {
    auto const &s = signals[m];
    if (s.empty())
    {
      continue;
    }
    double const mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    out[m]            = (mean - model.offset) / model.scale;
  }
  return out;
}

}  // namespace datamarket
