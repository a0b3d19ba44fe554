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

#include "datamarket/leakage.hpp"

#include "datamarket/errors.hpp"

#include <algorithm>
#include <cmath>

namespace datamarket {

void RunningPearson::push(double x, double y)
{
  ++n_;
  double const n  = static_cast<double>(n_);
  double const dx = x - mean_x_;
  double const dy = y - mean_y_;
  mean_x_ += dx / n;
  mean_y_ += dy / n;
  m2x_ += dx * (x - mean_x_);
  m2y_ += dy * (y - mean_y_);
  cxy_ += dx * (y - mean_y_);
}

bool RunningPearson::defined() const
{
  return n_ >= 2 && m2x_ > 0.0 && m2y_ > 0.0;
}

double RunningPearson::value() const
{
  if (!defined())
  {
    return 0.0;
  }
  return std::clamp(cxy_ / std::sqrt(m2x_ * m2y_), -1.0, 1.0);
}

SequentialCorrelation::SequentialCorrelation(std::size_t devices, double tol, std::size_t patience)
  : m_{devices}
  , tol_{tol}
  , patience_{patience}
{
  if (devices < 2)
  {
    throw DomainError("correlation estimate needs at least two devices");
  }
  if (!(tol > 0.0))
  {
    throw DomainError("tolerance must be positive");
  }
  auto const pairs = m_ * (m_ - 1) / 2;
  pairs_.resize(pairs);
  last_.assign(pairs, std::numeric_limits<double>::quiet_NaN());
  streak_.assign(pairs, 0);
  converged_at_.assign(pairs, kNotConverged);
}

std::size_t SequentialCorrelation::index(std::size_t i, std::size_t j) const
{
  // i < j, row-major upper triangle
  return i * m_ - i * (i + 1) / 2 + (j - i - 1);
}

void SequentialCorrelation::observe(std::span<double const> values, std::vector<bool> const *active)
{
  if (values.size() != m_)
  {
    throw DomainError("observe: one value per device expected");
  }
  ++rounds_;
  for (std::size_t i = 0; i < m_; ++i)
  {
    if (active && !(*active)[i])
    {
      continue;
    }
    for (std::size_t j = i + 1; j < m_; ++j)
    {
      if (active && !(*active)[j])
      {
        continue;
      }
      auto const k = index(i, j);
      auto      &p = pairs_[k];
      p.push(values[i], values[j]);
      if (!p.defined())
      {
        continue;
      }
      double const r = p.value();
      if (!std::isnan(last_[k]) && std::abs(r - last_[k]) < tol_)
      {
        if (++streak_[k] >= patience_ && converged_at_[k] == kNotConverged)
        {
          converged_at_[k] = p.count();
        }
      }
      else
      {
        streak_[k] = 0;
      }
      last_[k] = r;
    }
  }
}

LeakageMatrix SequentialCorrelation::result() const
{
  LeakageMatrix out;
  auto const    m = static_cast<Eigen::Index>(m_);
  out.r           = Eigen::MatrixXd::Identity(m, m);
  out.rounds_to_converge.assign(m_, std::vector<std::size_t>(m_, 0));
  out.defined.assign(m_, std::vector<bool>(m_, true));
  for (std::size_t i = 0; i < m_; ++i)
  {
    for (std::size_t j = i + 1; j < m_; ++j)
    {
      auto const &p  = pairs_[index(i, j)];
      double const r = p.value();
      out.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
      out.r(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
      out.rounds_to_converge[i][j] = out.rounds_to_converge[j][i] = converged_at_[index(i, j)];
      out.defined[i][j] = out.defined[j][i] = p.defined();
    }
  }
  out.g_influence = influence_matrix(out.r);
  return out;
}

LeakageMatrix sequential_correlation_estimate(std::vector<std::vector<double>> const &streams,
                                              double tol)
{
  SequentialCorrelation est(streams.size(), tol);
  std::size_t           longest = 0;
  for (auto const &s : streams)
  {
    longest = std::max(longest, s.size());
  }
  std::vector<double> values(streams.size());
  std::vector<bool>   active(streams.size());
  for (std::size_t t = 0; t < longest; ++t)
  {
    for (std::size_t i = 0; i < streams.size(); ++i)
    {
      active[i] = t < streams[i].size();
      values[i] = active[i] ? streams[i][t] : 0.0;
    }
    est.observe(values, &active);
  }
  return est.result();
}

Eigen::MatrixXd influence_matrix(Eigen::MatrixXd const &r)
{
  if (r.rows() != r.cols())
  {
    throw DomainError("correlation matrix must be square");
  }
  auto const      m = r.rows();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  double          peak = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
  {
    for (Eigen::Index j = 0; j < m; ++j)
    {
      if (i != j)
      {
        peak = std::max(peak, std::abs(r(i, j)));
      }
    }
  }
  if (peak <= 0.0)
  {
    return g;
  }
  for (Eigen::Index i = 0; i < m; ++i)
  {
    for (Eigen::Index j = 0; j < m; ++j)
    {
      if (i != j)
      {
        g(i, j) = std::abs(r(i, j)) / peak;
      }
    }
  }
  return g;
}

double opportunity_cost(std::size_t j, std::span<std::size_t const> members,
                        std::vector<bool> const &a, Eigen::MatrixXd const &g)
{
  if (std::find(members.begin(), members.end(), j) == members.end())
  {
    throw DomainError("opportunity_cost: device is not a coalition member");
  }
  if (!a[j])
  {
    return 0.0;
  }
  double sum = 0.0;
  for (auto i : members)
  {
    if (i != j && a[i])
    {
      sum += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return sum;
}

double coalition_cost(std::size_t coalition_size, std::size_t comm_rounds, double unit_comm_cost)
{
  if (coalition_size <= 1)
  {
    return 0.0;
  }
  return static_cast<double>(coalition_size) * static_cast<double>(comm_rounds) * unit_comm_cost;
}

}  // namespace datamarket
