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

#include <string>
#include <string_view>
#include <vector>

#include "qanneal/qops.hpp"

namespace qanneal {

struct PureState {
  QubitCount n;
  ComplexVector amplitudes;

  ComplexMatrix density() const { return amplitudes * amplitudes.adjoint(); }
};

// Target-state families. The broken-path legs (Y, Y', X, X', V, V', V3) are
// parametrized by gamma in [0, 1]; Ghz and W are the fixed entangled endpoints
// and ignore gamma; Flat is the uniform superposition.
enum class PathFamily { Flat, Y, YPrime, X, XPrime, V, VPrime, V3, Ghz, W };

std::string_view to_string(PathFamily family);
PathFamily parse_family(std::string_view name);
const std::vector<PathFamily>& all_families();

struct PathSpec {
  PathFamily family = PathFamily::Flat;
  QubitCount n{2};
  std::vector<double> gamma_grid = default_gamma_grid();

  static std::vector<double> default_gamma_grid(int intervals = 10);
  // Throws ArgumentError on incompatible family/n or a malformed grid.
  void validate() const;
};

PureState basis_pure(QubitCount n, std::size_t index);
PureState flat_pure(QubitCount n);
PureState ghz_pure(QubitCount n);
PureState w_pure(QubitCount n);

ComplexMatrix flat_state(QubitCount n);
ComplexMatrix ghz_state(QubitCount n);
ComplexMatrix w_state(QubitCount n);

// Closed-form member of a path family at gamma, normalized to unit norm.
PureState path_state(const PathSpec& spec, double gamma);

// <sigma_z> per qubit: Re tr(rho sigma_z,i).
std::vector<double> spin_averages(const ComplexMatrix& rho);

QubitCount qubits_for_dim(Eigen::Index dim);

}  // namespace qanneal
