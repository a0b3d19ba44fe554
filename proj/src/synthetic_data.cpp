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

#include "datamarket/errors.hpp"
#include "datamarket/random.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace datamarket {
namespace {

Eigen::MatrixXd mvn_transform(Eigen::MatrixXd const &covariance)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

// Features with row mean exactly `centre`: centre + (e - mean(e)).
void fill_row(Eigen::MatrixXd &features, Eigen::Index row, double centre, Rng &rng)
{
  std::normal_distribution<double> normal{0.0, 1.0};
  auto const d = features.cols();
  if (d == 1)
  {
    features(row, 0) = centre;
    return;
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < d; ++k)
  {
    features(row, k) = normal(rng);
    sum += features(row, k);
  }
  double const mean = sum / static_cast<double>(d);
  for (Eigen::Index k = 0; k < d; ++k)
  {
    features(row, k) += centre - mean;
  }
}

}  // namespace

Eigen::VectorXd ground_truth_model(std::size_t d)
{
  Eigen::VectorXd w(static_cast<Eigen::Index>(d));
  double          c = 1.0;
  for (Eigen::Index k = 0; k < w.size(); ++k)
  {
    w[k] = c;
    c *= -0.5;
  }
  return w;
}

void validate_covariance(Eigen::MatrixXd const &covariance)
{
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0)
  {
    throw DomainError("covariance must be a non-empty square matrix");
  }
  double const scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
  {
    throw DomainError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
  Eigen::Index                                   idx = 0;
  double const lowest = eig.eigenvalues().minCoeff(&idx);
  if (lowest < -1e-10 * scale)
  {
    std::ostringstream msg;
    msg.precision(17);
    msg << "covariance is not positive semi-definite: eigenvalue " << idx << " = " << lowest;
    throw DomainError(msg.str());
  }
}

std::vector<SellerDataset> generate_correlated_profiles(CorrelationSpec const &spec,
                                                        std::uint64_t          seed)
{
  auto const m = spec.num_devices;
  if (m == 0)
  {
    throw DomainError("correlation spec has no devices");
  }
  if (static_cast<std::size_t>(spec.mean_vector.size()) != m ||
      static_cast<std::size_t>(spec.covariance.rows()) != m)
  {
    throw DomainError("mean vector and covariance must match num_devices");
  }
  if (spec.feature_dim == 0)
  {
    throw DomainError("feature dimension must be at least 1");
  }
  validate_covariance(spec.covariance);

  std::vector<std::size_t> counts = spec.samples_per_device;
  if (spec.shared_sample_ids)
  {
    auto const &ids = *spec.shared_sample_ids;
    if (ids.size() != m)
    {
      throw DomainError("shared_sample_ids must list one id set per device");
    }
    counts.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i)
    {
      std::set<SampleId> unique(ids[i].begin(), ids[i].end());
      if (unique.size() != ids[i].size())
      {
        throw DomainError("duplicate sample id on device " + std::to_string(i));
      }
      if (!ids[i].empty() && *unique.begin() < 0)
      {
        throw DomainError("sample ids must be non-negative");
      }
      counts[i] = ids[i].size();
    }
  }
  if (counts.size() != m)
  {
    throw DomainError("samples_per_device must have num_devices entries");
  }
  for (std::size_t i = 0; i < m; ++i)
  {
    if (counts[i] == 0)
    {
      throw DomainError("device " + std::to_string(i) + " has no samples");
    }
  }

  auto const                       steps     = *std::max_element(counts.begin(), counts.end());
  Eigen::MatrixXd const            transform = mvn_transform(spec.covariance);
  Eigen::VectorXd const            w         = ground_truth_model(spec.feature_dim);
  auto const                       d         = static_cast<Eigen::Index>(spec.feature_dim);
  Rng                              latent_rng = make_rng(seed, 0);
  std::normal_distribution<double> normal{0.0, 1.0};

  std::vector<SellerDataset> out(m);
  SampleId                   offset = 0;
  for (std::size_t i = 0; i < m; ++i)
  {
    auto &ds     = out[i];
    ds.device_id = i;
    ds.features  = Eigen::MatrixXd(static_cast<Eigen::Index>(counts[i]), d);
    ds.labels    = Eigen::VectorXd(static_cast<Eigen::Index>(counts[i]));
    if (spec.shared_sample_ids)
    {
      ds.sample_ids = (*spec.shared_sample_ids)[i];
    }
    else
    {
      ds.sample_ids.resize(counts[i]);
      for (std::size_t t = 0; t < counts[i]; ++t)
      {
        ds.sample_ids[t] = offset + static_cast<SampleId>(t);
      }
      offset += static_cast<SampleId>(counts[i]);
    }
  }

  std::vector<Rng> device_rng;
  device_rng.reserve(m);
  for (std::size_t i = 0; i < m; ++i)
  {
    device_rng.push_back(make_rng(seed, 1 + i));
  }

  Eigen::VectorXd eps(static_cast<Eigen::Index>(m));
  for (std::size_t t = 0; t < steps; ++t)
  {
    for (Eigen::Index k = 0; k < eps.size(); ++k)
    {
      eps[k] = normal(latent_rng);
    }
    Eigen::VectorXd const z = spec.mean_vector + transform * eps;
    for (std::size_t i = 0; i < m; ++i)
    {
      if (t >= counts[i])
      {
        continue;
      }
      auto &ds  = out[i];
      auto  row = static_cast<Eigen::Index>(t);
      fill_row(ds.features, row, z[static_cast<Eigen::Index>(i)], device_rng[i]);
      ds.labels[row] = ds.features.row(row).dot(w) + spec.label_noise * normal(device_rng[i]);
    }
  }
  return out;
}

std::vector<SellerDataset> make_three_seller_scenario(double mu_x, double sigma_x, double mu_y,
                                                      double sigma_y, std::size_t n,
                                                      std::uint64_t seed)
{
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
  {
    throw DomainError("three-seller scenario needs positive standard deviations");
  }
  if (n == 0)
  {
    throw DomainError("three-seller scenario: empty dataset (n = 0)");
  }
  Rng                              rng = make_rng(seed, 0);
  std::normal_distribution<double> normal{0.0, 1.0};
  std::vector<SellerDataset>       out(3);
  for (std::size_t i = 0; i < 3; ++i)
  {
    out[i].device_id = i;
    out[i].features  = Eigen::MatrixXd(static_cast<Eigen::Index>(n), 1);
    out[i].labels    = Eigen::VectorXd(static_cast<Eigen::Index>(n));
    out[i].sample_ids.resize(n);
    for (std::size_t t = 0; t < n; ++t)
    {
      out[i].sample_ids[t] = static_cast<SampleId>(i * n + t);
    }
  }
  for (std::size_t t = 0; t < n; ++t)
  {
    auto const   row = static_cast<Eigen::Index>(t);
    double const x   = mu_x + sigma_x * normal(rng);
    double const y   = mu_y + sigma_y * normal(rng);
    double const z   = 0.5 * x + y;
    double const v[3]{x, y, z};
    for (std::size_t i = 0; i < 3; ++i)
    {
      out[i].features(row, 0) = v[i];
      out[i].labels[row]      = v[i];
    }
  }
  return out;
}

std::vector<SellerDataset> make_overlap_scenario(std::vector<std::vector<SampleId>> const &sample_sets,
                                                 std::size_t feature_dim)
{
  if (feature_dim == 0)
  {
    throw DomainError("feature dimension must be at least 1");
  }
  Eigen::VectorXd const      w = ground_truth_model(feature_dim);
  std::vector<SellerDataset> out;
  out.reserve(sample_sets.size());
  for (std::size_t i = 0; i < sample_sets.size(); ++i)
  {
    std::set<SampleId> const unique(sample_sets[i].begin(), sample_sets[i].end());
    if (unique.empty())
    {
      throw DomainError("overlap scenario: device " + std::to_string(i) + " has no samples");
    }
    if (*unique.begin() < 0)
    {
      throw DomainError("sample ids must be non-negative");
    }
    SellerDataset ds;
    ds.device_id = i;
    ds.sample_ids.assign(unique.begin(), unique.end());
    auto const n = static_cast<Eigen::Index>(unique.size());
    ds.features  = Eigen::MatrixXd(n, static_cast<Eigen::Index>(feature_dim));
    ds.labels    = Eigen::VectorXd(n);
    for (Eigen::Index r = 0; r < n; ++r)
    {
      Rng rng = make_rng(0x6f7665726c6170ULL, static_cast<std::uint64_t>(ds.sample_ids[r]));
      std::normal_distribution<double> normal{0.0, 1.0};
      for (Eigen::Index k = 0; k < ds.features.cols(); ++k)
      {
        ds.features(r, k) = normal(rng);
      }
      ds.labels[r] = ds.features.row(r).dot(w) + 0.1 * normal(rng);
    }
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<double> feature_mean_stream(SellerDataset const &dataset)
{
  std::vector<double> out(dataset.size());
  for (std::size_t t = 0; t < out.size(); ++t)
  {
    out[t] = dataset.features.row(static_cast<Eigen::Index>(t)).mean();
  }
  return out;
}

}  // namespace datamarket
