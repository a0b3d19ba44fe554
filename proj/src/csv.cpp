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

#include "datamarket/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace datamarket {

std::string format_real(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::filesystem::path const &path, CsvTable const &table)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  auto const line = [&out](std::vector<std::string> const &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
      out << (i ? "," : "") << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (auto const &r : table.rows)
  {
    line(r);
  }
  if (!out)
  {
    throw std::runtime_error("write failed for " + path.string());
  }
}

CsvTable read_csv(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  CsvTable    table;
  std::string text;
  bool        first = true;
  while (std::getline(in, text))
  {
    std::vector<std::string> cells;
    std::stringstream        ss(text);
    for (std::string cell; std::getline(ss, cell, ',');)
    {
      cells.push_back(cell);
    }
    if (first)
    {
      table.header = std::move(cells);
      first        = false;
    }
    else
    {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

CsvTable dataset_table(std::vector<SellerDataset> const &datasets)
{
  CsvTable    t;
  std::size_t d = datasets.empty() ? 0 : datasets.front().dim();
  t.header      = {"device_id", "sample_id"};
  for (std::size_t k = 0; k < d; ++k)
  {
    t.header.push_back("feature_" + std::to_string(k));
  }
  t.header.push_back("label");
  for (auto const &ds : datasets)
  {
    for (std::size_t r = 0; r < ds.size(); ++r)
    {
      auto const               row = static_cast<Eigen::Index>(r);
      std::vector<std::string> cells{std::to_string(ds.device_id), std::to_string(ds.sample_ids[r])};
      for (Eigen::Index k = 0; k < ds.features.cols(); ++k)
      {
        cells.push_back(format_real(ds.features(row, k)));
      }
      cells.push_back(format_real(ds.labels[row]));
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

CsvTable type_table(std::vector<DataType> const &types)
{
  CsvTable t;
  t.header = {"device_id", "theta", "xi", "phi", "level"};
  for (std::size_t m = 0; m < types.size(); ++m)
  {
    auto const &x = types[m];
    t.rows.push_back({std::to_string(m), format_real(x.theta), format_real(x.xi), format_real(x.phi),
                      std::to_string(x.level)});
  }
  return t;
}

CsvTable trace_table(SolveTrace const &trace)
{
  CsvTable t;
  t.header = {"iter", "device", "from_coalition", "to_coalition", "value_before", "value_after"};
  for (auto const &r : trace.iterations)
  {
    t.rows.push_back({std::to_string(r.iter), std::to_string(r.device),
                      std::to_string(r.from_coalition), std::to_string(r.to_coalition),
                      format_real(r.value_before), format_real(r.value_after)});
  }
  return t;
}

CsvTable summary_table(SolveTrace const &trace)
{
  CsvTable t;
  t.header = {"device_id", "coalition_id", "type_level", "price", "a"};
  std::vector<Coalition const *> owner(trace.final_prices.size(), nullptr);
  for (auto const &c : trace.final_partition.coalitions)
  {
    for (auto m : c.members)
    {
      owner[m] = &c;
    }
  }
  for (std::size_t m = 0; m < owner.size(); ++m)
  {
    t.rows.push_back({std::to_string(m), owner[m] ? std::to_string(owner[m]->id) : "",
                      owner[m] ? std::to_string(owner[m]->type_level) : "",
                      format_real(trace.final_prices[m]),
                      trace.final_participation[m] ? "1" : "0"});
  }
  return t;
}

}  // namespace datamarket
