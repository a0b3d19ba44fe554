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

#include "datamarket/coalition.hpp"
#include "datamarket/learner.hpp"
#include "datamarket/synthetic_data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace datamarket {

struct CsvTable
{
  std::vector<std::string>              header;
  std::vector<std::vector<std::string>> rows;
};

// 17 significant digits, lossless for doubles.
std::string format_real(double x);

void     write_csv(std::filesystem::path const &path, CsvTable const &table);
CsvTable read_csv(std::filesystem::path const &path);

CsvTable dataset_table(std::vector<SellerDataset> const &datasets);
CsvTable type_table(std::vector<DataType> const &types);
CsvTable trace_table(SolveTrace const &trace);
CsvTable summary_table(SolveTrace const &trace);

}  // namespace datamarket
