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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace datamarket {

using SampleId = std::int64_t;

struct CorrelationSpec
{
  std::size_t                                       num_devices{0};
  Eigen::VectorXd                                   mean_vector;
  Eigen::MatrixXd                                   covariance;
  std::vector<std::size_t>                          samples_per_device;
  std::optional<std::vector<std::vector<SampleId>>> shared_sample_ids;
  std::size_t                                       feature_dim{3};
  double                                            label_noise{0.1};
};

struct SellerDataset
{
  std::size_t           device_id{0};
  std::vector<SampleId> sample_ids;
  Eigen::MatrixXd       features;  // n x d
  Eigen::VectorXd       labels;    // n

  std::size_t size() const
  {
    return sample_ids.size();
  }
  std::size_t dim() const
  {
    return static_cast<std::size_t>(features.cols());
  }
};

// Fixed linear ground truth used for labels: w_k = (-1/2)^k.
Eigen::VectorXd ground_truth_model(std::size_t d);

// Throws DomainError naming the offending eigenvalue if `covariance` is not
// symmetric positive semi-definite.
void validate_covariance(Eigen::MatrixXd const &covariance);

// Device m's row t has features whose mean is exactly z_t[m], with
// z_t ~ N(mean_vector, covariance) drawn once per time step.
std::vector<SellerDataset> generate_correlated_profiles(CorrelationSpec const &spec,
                                                        std::uint64_t          seed);

// Sellers 0, 1, 2 carry X, Y and Z = 0.5 X + Y as one-dimensional features.
std::vector<SellerDataset> make_three_seller_scenario(double mu_x, double sigma_x, double mu_y,
                                                      double sigma_y, std::size_t n,
                                                      std::uint64_t seed);

// Rows are a deterministic function of the sample id, so shared ids carry
// bit-identical rows on every device.
std::vector<SellerDataset> make_overlap_scenario(std::vector<std::vector<SampleId>> const &sample_sets,
                                                 std::size_t feature_dim = 3);

// Per-sample mean over features; the stream a device reveals one round at a time.
std::vector<double> feature_mean_stream(SellerDataset const &dataset);

}  // namespace datamarket
