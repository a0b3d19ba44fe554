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

#include <stdexcept>
#include <string>

namespace datamarket {

// Invalid input to an operation (bad shape, out-of-range parameter).
class DomainError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent configuration file.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during a computation (divergence, non-finite values).
class NumericError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Enumeration or search size above the supported cap.
class CapacityError : public std::length_error
{
public:
  using std::length_error::length_error;
};

}  // namespace datamarket
