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

#include <filesystem>
#include <utility>
#include <vector>

#include "qanneal/qops.hpp"

namespace qanneal {

using Series = std::vector<double>;

// Which parameter classes gradient descent may update.
struct TrainableMask {
  bool zeta = true;
  bool eps = false;
  bool kk = false;
};

// Piecewise-constant Hamiltonian parameters: entry k of every series holds on
// [k*dt, (k+1)*dt). Couplings are stored once per unordered pair a < b, in the
// order given by pair_index().
struct ScheduleSet {
  QubitCount n{1};
  int timesteps = 0;
  double dt = 0.0;
  std::vector<Series> zeta;  // [pair][step]
  std::vector<Series> eps;   // [qubit][step]
  std::vector<Series> kk;    // [qubit][step], tunneling amplitudes
  TrainableMask trainable;

  static ScheduleSet zeros(QubitCount n, int timesteps, double dt);
  double t_f() const { return timesteps * dt; }
  // Throws ArgumentError if any series has the wrong shape.
  void validate() const;
};

int pair_index(int a, int b, QubitCount n);
std::pair<int, int> pair_sites(int pair, QubitCount n);

// K(t) falling linearly from k0 at step 0 to zero at step floor(T * end_fraction).
inline constexpr double kDefaultRampEnd = 0.5;

Series default_tunneling_ramp(int timesteps, double k0, double ramp_end_fraction = kDefaultRampEnd);

// Zero couplings and biases with the default tunneling ramp on every qubit.
ScheduleSet standard_schedule(QubitCount n, int timesteps, double dt, double k0,
                              double ramp_end_fraction = kDefaultRampEnd);

// Linear inverse-temperature ramp beta(t) = beta_f * t / t_f.
struct BetaRamp {
  double beta_f = 0.0;
  double t_f = 1.0;
};

double beta_at(const BetaRamp& ramp, double t);

// H(t_k) = sum_a K_a X_a + eps_a Z_a + sum_{a<b} zeta_ab Z_a Z_b
ComplexMatrix assemble_hamiltonian(const ScheduleSet& s, int step);

// Single monotone annealing parameter S_w. Node 0 of S_w is s0; node k+1 is
// s0 + increments[0] + ... + increments[k]. Step k of the expanded schedule
// takes the value at node k + 1, so the last step carries the final values.
struct MonotoneSchedule {
  QubitCount n{2};
  double dt = 0.0;
  Series increments;
  double s0 = 0.0;
  Series zeta_final;  // per pair
  Series eps_final;   // per qubit

  static MonotoneSchedule uniform(QubitCount n, int timesteps, double dt);
  int timesteps() const { return static_cast<int>(increments.size()); }
  Series sw_nodes() const;
};

// (S_w(t_k) - S_w(0)) / (S_w(t_kf) - S_w(0)) for every step.
Series annealing_fraction(const MonotoneSchedule& m);

// zeta = f * zeta_final, eps = f * eps_final, K = (1 - f) * k0.
ScheduleSet expand_monotone(const MonotoneSchedule& m, double k0);

// One copy of `zeta2` per unordered pair of an n-qubit system.
std::vector<Series> lift_pair_schedule(const Series& zeta2, QubitCount n);

// CSV `step,time,param_name,value` plus a JSON sidecar with n, T, dt and the
// trainable mask. Values are written with 17 significant digits.
void write_schedule(const ScheduleSet& s, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path);
ScheduleSet read_schedule(const std::filesystem::path& csv_path,
                          const std::filesystem::path& json_path);

}  // namespace qanneal
