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

#include "qanneal/states.hpp"

#include <cmath>
#include <string>

#include "qanneal/errors.hpp"

namespace qanneal {

namespace {

struct FamilyInfo {
  PathFamily family;
  std::string_view name;
  int required_n;  // 0: any n >= min_n
  int min_n;
};

constexpr FamilyInfo kFamilies[] = {
    {PathFamily::Flat, "flat", 0, 1},  {PathFamily::Y, "Y", 2, 2},
    {PathFamily::YPrime, "Yp", 2, 2},  {PathFamily::X, "X", 3, 3},
    {PathFamily::XPrime, "Xp", 3, 3},  {PathFamily::V, "V", 2, 2},
    {PathFamily::VPrime, "Vp", 2, 2},  {PathFamily::V3, "V3", 3, 3},
    {PathFamily::Ghz, "ghz", 0, 2},    {PathFamily::W, "w", 0, 2},
};

const FamilyInfo& info(PathFamily family) {
  for (const auto& f : kFamilies) {
    if (f.family == family) return f;
  }
  throw ArgumentError("unknown path family");
}

PureState from_weights(QubitCount n, const std::vector<std::pair<std::size_t, double>>& weights) {
  ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(n.dim()));
  for (const auto& [index, w] : weights) amps(static_cast<Eigen::Index>(index)) = w;
  const double norm = amps.norm();
  if (norm == 0.0) throw ArgumentError("path state has zero norm");
  return PureState{n, amps / norm};
}

}  // namespace

std::string_view to_string(PathFamily family) { return info(family).name; }

PathFamily parse_family(std::string_view name) {
  for (const auto& f : kFamilies) {
    if (f.name == name) return f.family;
  }
  throw ArgumentError("unknown path family '" + std::string(name) + "'");
}

const std::vector<PathFamily>& all_families() {
  static const std::vector<PathFamily> families = [] {
    std::vector<PathFamily> out;
    for (const auto& f : kFamilies) out.push_back(f.family);
    return out;
  }();
  return families;
}

std::vector<double> PathSpec::default_gamma_grid(int intervals) {
  std::vector<double> grid;
  for (int i = 0; i <= intervals; ++i) grid.push_back(static_cast<double>(i) / intervals);
  return grid;
}

void PathSpec::validate() const {
  const auto& f = info(family);
  if (f.required_n != 0 && n.value() != f.required_n) {
    throw ArgumentError("family " + std::string(f.name) + " requires n = " +
                        std::to_string(f.required_n));
  }
  if (n.value() < f.min_n) {
    throw ArgumentError("family " + std::string(f.name) + " requires n >= " +
                        std::to_string(f.min_n));
  }
  if (gamma_grid.size() < 2 || gamma_grid.front() != 0.0 || gamma_grid.back() != 1.0) {
    throw ArgumentError("gamma grid must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < gamma_grid.size(); ++i) {
    if (!(gamma_grid[i] > gamma_grid[i - 1])) {
      throw ArgumentError("gamma grid must be strictly increasing");
    }
  }
}

PureState basis_pure(QubitCount n, std::size_t index) {
  if (index >= n.dim()) throw ArgumentError("basis index out of range");
  ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(n.dim()));
  amps(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState{n, amps};
}

PureState flat_pure(QubitCount n) {
  const auto dim = static_cast<Eigen::Index>(n.dim());
  return PureState{n, ComplexVector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)))};
}

PureState ghz_pure(QubitCount n) {
  if (n.value() < 2) throw ArgumentError("GHZ state requires n >= 2");
  return from_weights(n, {{0, 1.0}, {n.dim() - 1, 1.0}});
}

PureState w_pure(QubitCount n) {
  if (n.value() < 2) throw ArgumentError("W state requires n >= 2");
  std::vector<std::pair<std::size_t, double>> weights;
  for (int q = 0; q < n.value(); ++q) weights.emplace_back(std::size_t{1} << q, 1.0);
  return from_weights(n, weights);
}

ComplexMatrix flat_state(QubitCount n) {
  const auto dim = static_cast<Eigen::Index>(n.dim());
  return ComplexMatrix::Constant(dim, dim, 1.0 / static_cast<double>(dim));
}

ComplexMatrix ghz_state(QubitCount n) { return ghz_pure(n).density(); }
ComplexMatrix w_state(QubitCount n) { return w_pure(n).density(); }

PureState path_state(const PathSpec& spec, double gamma) {
  spec.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ArgumentError("gamma " + std::to_string(gamma) + " outside [0, 1]");
  }
  const QubitCount n = spec.n;
  const double g = gamma;
  const double r = 1.0 - gamma;
  switch (spec.family) {
    case PathFamily::Flat:
      return flat_pure(n);
    case PathFamily::Ghz:
      return ghz_pure(n);
    case PathFamily::W:
      return w_pure(n);
    // |00> + (1-g)(|01> + |10> + |11>)
    case PathFamily::Y:
      return from_weights(n, {{0, 1.0}, {1, r}, {2, r}, {3, r}});
    // |00> + g|11>
    case PathFamily::YPrime:
      return from_weights(n, {{0, 1.0}, {3, g}});
    // |000> + |011> + (1-g)(|001> + |010> + |100> + |110> + |101> + |111>)
    case PathFamily::X:
      return from_weights(n, {{0, 1.0}, {3, 1.0}, {1, r}, {2, r}, {4, r}, {5, r}, {6, r}, {7, r}});
    // |000> + (1-g)|011> + g|111>
    case PathFamily::XPrime:
      return from_weights(n, {{0, 1.0}, {3, r}, {7, g}});
    // |01> + (1-g)(|00> + |11> + |10>)
    case PathFamily::V:
      return from_weights(n, {{1, 1.0}, {0, r}, {3, r}, {2, r}});
    // |01> + g|10>
    case PathFamily::VPrime:
      return from_weights(n, {{1, 1.0}, {2, g}});
    // |001> + (1-g)(every other basis state)
    case PathFamily::V3: {
      std::vector<std::pair<std::size_t, double>> weights{{1, 1.0}};
      for (std::size_t i = 0; i < 8; ++i) {
        if (i != 1) weights.emplace_back(i, r);
      }
      return from_weights(n, weights);
    }
  }
  throw ArgumentError("unknown path family");
}

QubitCount qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) throw ArgumentError("matrix dimension is not a power of two");
  return QubitCount(n);
}

std::vector<double> spin_averages(const ComplexMatrix& rho) {
  if (rho.rows() != rho.cols()) throw ArgumentError("spin_averages: matrix is not square");
  const QubitCount n = qubits_for_dim(rho.rows());
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-8) {
    throw ContractError("spin_averages: trace " + std::to_string(tr.real()) + " is not 1");
  }
  const Eigen::VectorXd diag = rho.diagonal().real();
  std::vector<double> spins;
  spins.reserve(static_cast<std::size_t>(n.value()));
  for (int q = 0; q < n.value(); ++q) spins.push_back(diag.dot(z_diagonal(q, n)));
  return spins;
}

}  // namespace qanneal
