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
#include "datamarket/learner.hpp"
#include "datamarket/oracle.hpp"
#include "datamarket/random.hpp"
#include "datamarket/synthetic_data.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace datamarket;

namespace {

SellerDataset make_set(Eigen::MatrixXd X, Eigen::VectorXd y)
{
  SellerDataset d;
  d.features = std::move(X);
  d.labels   = std::move(y);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i)
  {
    d.sample_ids.push_back(i);
  }
  return d;
}

std::vector<SellerDataset> task(std::uint64_t seed, double noise = 0.1)
{
  CorrelationSpec s;
  s.num_devices        = 2;
  s.mean_vector        = Eigen::VectorXd::Zero(2);
  s.covariance         = Eigen::MatrixXd::Identity(2, 2);
  s.samples_per_device = {120, 80};
  s.label_noise        = noise;
  return generate_correlated_profiles(s, seed);
}

double set_size(std::span<std::size_t const> s)
{
  return static_cast<double>(s.size());
}

}  // namespace

TEST_CASE("squared loss by hand")
{
  Eigen::MatrixXd X(1, 1);
  X << 2.0;
  Eigen::VectorXd y(1);
  y << 5.0;
  ModelParams w{Eigen::VectorXd::Constant(1, 1.0)};
  auto        one = make_set(X, y);
  CHECK(local_loss(w, one) == 9.0);

  Eigen::MatrixXd X2(2, 1);
  X2 << 2.0, 2.0;
  Eigen::VectorXd y2(2);
  y2 << 5.0, 5.0;
  CHECK(local_loss(w, make_set(X2, y2)) == 9.0);

  // local losses 4 and 16 on equal sizes; weighted mean by hand is 10
  Eigen::VectorXd ya(1), yb(1);
  ya << 4.0;
  yb << 6.0;
  std::vector<SellerDataset> two{make_set(X, ya), make_set(X, yb)};
  CHECK(global_loss(w, two) == 10.0);
  CHECK(global_loss(w, std::span(two).first(1)) == local_loss(w, two[0]));

  ModelParams bad{Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(local_loss(bad, one), DomainError);
  CHECK_THROWS_AS(local_loss(w, SellerDataset{}), DomainError);
}

TEST_CASE("perfect fit has zero loss")
{
  auto        ds = task(1, 0.0);
  ModelParams w{ground_truth_model(3)};
  CHECK(global_loss(w, ds) < 1e-24);
  CHECK(global_gradient(w, ds).norm() < 1e-12);
}

TEST_CASE("training reaches the least-squares optimum")
{
  auto            ds = task(2);
  Eigen::MatrixXd X(200, 3);
  Eigen::VectorXd y(200);
  X << ds[0].features, ds[1].features;
  y << ds[0].labels, ds[1].labels;
  ModelParams  star{(X.transpose() * X).ldlt().solve(X.transpose() * y)};
  double const best = global_loss(star, ds);

  auto a = train(ds, 500, 0.1, 1);
  auto b = train(ds, 500, 0.1, 2);
  CHECK(global_loss(a, ds) - best < 1e-3);
  CHECK((a.w - b.w).norm() < 1e-3);

  auto init = train(ds, 0, 0.1, 1);
  CHECK(init.w.norm() < 0.1);
  CHECK(init.w == train(ds, 0, 0.1, 1).w);

  double prev = global_loss(init, ds);
  for (std::size_t steps : {1, 5, 20, 100})
  {
    double const l = global_loss(train(ds, steps, 0.05, 1), ds);
    CHECK(l <= prev + 1e-15);
    prev = l;
  }
  CHECK_THROWS_AS(train(ds, 200, 50.0, 1), NumericError);
}

TEST_CASE("potential contraction")
{
  auto                     ds       = task(3);
  ModelParams              baseline = train(ds, 0, 0.05, 7);
  std::vector<std::size_t> none, all(ds[0].size()), half;
  for (std::size_t i = 0; i < all.size(); ++i)
  {
    all[i] = i;
    if (i % 2 == 0)
    {
      half.push_back(i);
    }
  }
  CHECK(potential(ds[0], none, baseline, ds, 0.05) == 1.0);
  double const full = potential(ds[0], all, baseline, ds, 0.05);
  CHECK(full < 1.0);
  CHECK(full >= 0.0);

  ModelParams opt{ground_truth_model(3)};
  auto        exact = task(4, 0.0);
  CHECK(potential(exact[0], all, opt, exact, 0.05) == 0.0);

  auto   rng = make_rng(17);
  double sub = 0.0, sup = 0.0;
  for (int trial = 0; trial < 100; ++trial)
  {
    std::vector<std::size_t> rows(all);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::vector<std::size_t> small(rows.begin(), rows.begin() + 5);
    std::vector<std::size_t> large(rows.begin(), rows.begin() + 30);
    std::sort(small.begin(), small.end());
    std::sort(large.begin(), large.end());
    sub += potential(ds[0], small, baseline, ds, 0.05);
    sup += potential(ds[0], large, baseline, ds, 0.05);
  }
  CHECK(sup <= sub);
}

TEST_CASE("marginal contribution against exhaustive enumeration")
{
  std::vector<std::size_t> const z{0};
  // i = 1: D empty, gain 1; i = 2: D one uniform row of four, gain 3/4
  double const expected = (1.0 + 0.75) / 2.0;
  CHECK(oracle::exact_marginal_contribution(z, 4, 2, set_size) == doctest::Approx(expected));
  auto est = marginal_contribution_stats(z, 4, 2, 10000, 3, set_size);
  CHECK(std::abs(est.mean - expected) < 3.0 * est.std_error + 1e-12);

  CHECK(marginal_contribution(z, 1, 1, 50, 1, set_size) ==
        doctest::Approx(oracle::exact_marginal_contribution(z, 1, 1, set_size)).epsilon(1e-12));
  // z is the only row, so it is already in every non-empty batch
  auto nonempty = [](std::span<std::size_t const> s) { return static_cast<double>(!s.empty()); };
  auto only     = marginal_contribution_stats(std::vector<std::size_t>{0}, 1, 3, 2000, 1, nonempty);
  CHECK(oracle::exact_marginal_contribution(std::vector<std::size_t>{0}, 1, 3, nonempty) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(only.mean - 1.0 / 3.0) < 3.0 * only.std_error);
  auto contained = [](std::span<std::size_t const> s) { return std::find(s.begin(), s.end(), 0) != s.end() ? 1.0 : 0.0; };
  CHECK(marginal_contribution(std::vector<std::size_t>{0}, 1, 1, 10, 1, contained) == 1.0);
  CHECK_THROWS_AS(marginal_contribution(z, 4, 2, 0, 1, set_size), DomainError);
  CHECK(marginal_contribution(z, 4, 2, 500, 9, set_size) ==
        marginal_contribution(z, 4, 2, 500, 9, set_size));
}

TEST_CASE("marginal contribution estimator is unbiased on a learner set function")
{
  auto         ds       = task(5);
  SellerDataset small   = ds[0];
  small.features        = small.features.topRows(6).eval();
  small.labels          = small.labels.head(6).eval();
  small.sample_ids.resize(6);
  ModelParams  baseline = train(ds, 0, 0.05, 2);
  auto         J        = performance_potential(small, baseline, ds, 0.05);
  std::vector<std::size_t> const z{2};
  double const exact = oracle::exact_marginal_contribution(z, 6, 3, J);
  auto const   est   = marginal_contribution_stats(z, 6, 3, 4000, 1, J);
  CHECK(std::abs(est.mean - exact) < 3.0 * est.std_error + 1e-12);
}

TEST_CASE("data type quantizer")
{
  auto t = data_type(0.6, 0.5, 5);
  CHECK(t.phi == doctest::Approx(0.3));
  CHECK(t.level == 2);
  CHECK(data_type(0.9, 0.0, 4).level == 1);
  CHECK(data_type(0.9, 0.0, 4).phi == 0.0);
  CHECK(data_type(1.0, 1.0, 4).level == 4);
  CHECK(data_type(0.4, 1.0, 5).level == 3);
  CHECK_THROWS_AS(data_type(0.5, 1.5, 4), DomainError);
  CHECK_THROWS_AS(data_type(0.5, 0.5, 0), DomainError);

  int    last_level = 0;
  double last_phi   = -1.0;
  for (double xi = 0.0; xi <= 1.0; xi += 0.01)
  {
    auto d = data_type(0.7, xi, 6);
    CHECK(d.phi >= last_phi);
    CHECK(d.level >= last_level);
    last_phi   = d.phi;
    last_level = d.level;
  }
}

TEST_CASE("type estimation")
{
  std::vector<double> const xi{0.1, 0.45, 0.9};
  std::vector<std::vector<double>> clean(3);
  for (std::size_t m = 0; m < 3; ++m)
  {
    clean[m] = std::vector<double>(4, 2.0 * xi[m] + 0.5);
  }
  auto est = estimate_types(clean, {2.0, 0.5});
  for (std::size_t m = 0; m < 3; ++m)
  {
    REQUIRE(est[m].has_value());
    CHECK(std::abs(*est[m] - xi[m]) < 1e-9);
  }
  auto missing = estimate_types({{0.3}, {}});
  CHECK(missing[0].has_value());
  CHECK_FALSE(missing[1].has_value());

  auto                             rng = make_rng(3);
  std::normal_distribution<double> noise;
  auto const                       error = [&](std::size_t n) {
    double e = 0.0;
    for (int trial = 0; trial < 200; ++trial)
    {
      std::vector<std::vector<double>> s(1);
      for (std::size_t k = 0; k < n; ++k)
      {
        s[0].push_back(0.4 + noise(rng));
      }
      e += std::abs(*estimate_types(s)[0] - 0.4);
    }
    return e / 200.0;
  };
  double const e16 = error(16), e256 = error(256);
  CHECK(e256 < e16);
  CHECK(e256 * 4.0 == doctest::Approx(e16).epsilon(0.3));
}

TEST_CASE("gradient dissimilarity vanishes for identical devices")
{
  auto ds = task(6);
  ds[1]   = ds[0];
  auto r  = gradient_dissimilarity(ModelParams{Eigen::VectorXd::Zero(3)}, ds);
  CHECK(r[0] < 1e-12);
  CHECK(r[1] < 1e-12);
}
