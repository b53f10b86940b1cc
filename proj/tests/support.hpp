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

#include <cstdint>
#include <random>

#include "qanneal/adjoint.hpp"

namespace qanneal::testing {

// Fixed-seed generator so every property test sees the same instances.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  ComplexMatrix matrix(Eigen::Index d, double scale = 1.0) {
    ComplexMatrix m(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) m(r, c) = Complex{uniform(-scale, scale), uniform(-scale, scale)};
    }
    return m;
  }

  ComplexMatrix hermitian(Eigen::Index d, double scale = 1.0) {
    const ComplexMatrix m = matrix(d, scale);
    return 0.5 * (m + m.adjoint());
  }

  // Full-rank mixed state.
  ComplexMatrix density(Eigen::Index d) {
    const ComplexMatrix a = matrix(d);
    ComplexMatrix rho = a * a.adjoint();
    return rho / rho.trace().real();
  }

  ComplexMatrix pure_density(Eigen::Index d) {
    ComplexVector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex{uniform(-1, 1), uniform(-1, 1)};
    v.normalize();
    return v * v.adjoint();
  }

  ScheduleSet schedule(QubitCount n, int steps, double dt, double scale) {
    ScheduleSet s = ScheduleSet::zeros(n, steps, dt);
    for (auto* family : {&s.zeta, &s.eps, &s.kk}) {
      for (auto& series : *family) {
        for (double& v : series) v = uniform(-scale, scale);
      }
    }
    s.trainable = {true, true, true};
    return s;
  }

 private:
  std::mt19937_64 engine_;
};

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qanneal::testing
