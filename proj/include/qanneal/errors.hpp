// Copyright 2026 The qanneal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qanneal {

// Bad argument: out-of-range index, mismatched dimensions, incompatible family.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition on a numerical input did not hold (e.g. Hermiticity).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// exp(+-beta*lambda) would leave the double range.
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& what, double exponent, int step = -1)
      : std::runtime_error(what), exponent_(exponent), step_(step) {}
  double exponent() const { return exponent_; }
  int step() const { return step_; }

 private:
  double exponent_;
  int step_;
};

class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class DegenerateScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qanneal
