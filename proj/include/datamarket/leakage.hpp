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
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace datamarket {

inline constexpr std::size_t kNotConverged = std::numeric_limits<std::size_t>::max();

struct LeakageMatrix
{
  Eigen::MatrixXd                       r;           // symmetric, unit diagonal
  Eigen::MatrixXd                       g_influence;  // [0, 1], zero diagonal
  std::vector<std::vector<std::size_t>> rounds_to_converge;
  std::vector<std::vector<bool>>        defined;  // false when a stream had zero variance

  std::size_t size() const
  {
    return static_cast<std::size_t>(r.rows());
  }
};

struct CostParams
{
  double              unit_comm_cost{0.0};
  double              coalition_cost_bound{std::numeric_limits<double>::infinity()};
  std::vector<double> phi_threshold;
};

// Online Pearson estimate for one pair (co-moment form).
class RunningPearson
{
public:
  void push(double x, double y);

  std::size_t count() const
  {
    return n_;
  }
  bool   defined() const;
  double value() const;

private:
  std::size_t n_{0};
  double      mean_x_{0.0};
  double      mean_y_{0.0};
  double      m2x_{0.0};
  double      m2y_{0.0};
  double      cxy_{0.0};
};

// All pairs among M streams fed one round (one sample per device) at a time.
class SequentialCorrelation
{
public:
  SequentialCorrelation(std::size_t devices, double tol, std::size_t patience = 10);

  // values[i] is device i's revealed sample; devices whose stream ended pass
  // through `active` = false.
  void observe(std::span<double const> values, std::vector<bool> const *active = nullptr);

  LeakageMatrix result() const;

  std::size_t rounds() const
  {
    return rounds_;
  }

private:
  std::size_t                 m_;
  double                      tol_;
  std::size_t                 patience_;
  std::size_t                 rounds_{0};
  std::vector<RunningPearson> pairs_;
  std::vector<double>         last_;
  std::vector<std::size_t>    streak_;
  std::vector<std::size_t>    converged_at_;

  std::size_t index(std::size_t i, std::size_t j) const;
};

// Each pair uses the common prefix of its two streams.
LeakageMatrix sequential_correlation_estimate(std::vector<std::vector<double>> const &streams,
                                              double tol);

Eigen::MatrixXd influence_matrix(Eigen::MatrixXd const &r);

// sum_{i in S, i != j} g_ij a_i a_j.
double opportunity_cost(std::size_t j, std::span<std::size_t const> members,
                        std::vector<bool> const &a, Eigen::MatrixXd const &g);

double coalition_cost(std::size_t coalition_size, std::size_t comm_rounds, double unit_comm_cost);

}  // namespace datamarket
