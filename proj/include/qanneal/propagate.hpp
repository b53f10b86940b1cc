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
#include <optional>
#include <utility>
#include <vector>

#include "qanneal/qops.hpp"
#include "qanneal/schedule.hpp"

namespace qanneal {

// Forward pass under a piecewise-constant Hamiltonian.
//
// rho_s[k] is the real-time state after k steps, rho_s[k+1] = U_k rho_s[k] U_k^dagger
// with U_k = exp(i H_k dt). The temperature-dependent state at step k is
// rho_I[k] = exp(-beta(t_k) H) rho_s[k] exp(beta(t_k) H), H being the Hamiltonian
// that produced rho_s[k] (H_{k-1}; for k = 0 beta is zero). Only the final
// rho_I is formed eagerly; the others are built on request.
struct Trajectory {
  std::vector<ComplexMatrix> rho_s;           // T + 1
  std::vector<ComplexMatrix> hams;            // T
  std::vector<HermitianEigen> eigens;         // T, decompositions of hams
  std::vector<ComplexMatrix> step_unitaries;  // T
  ComplexMatrix rho_i_final;
  BetaRamp ramp;
  double dt = 0.0;

  int timesteps() const { return static_cast<int>(hams.size()); }
  double beta(int k) const;
  ComplexMatrix rho_i(int k) const;
  // ||rho_I - rho_I^dagger|| at t_f; nonzero whenever [rho_s, H] != 0.
  double terminal_hermiticity_defect() const;
};

// Reuses eigendecompositions across forward runs whose Hamiltonians repeat.
class HamiltonianCache {
 public:
  const HermitianEigen& decompose(int step, const ComplexMatrix& h);
  void clear() { entries_.clear(); }
  std::size_t hits() const { return hits_; }

 private:
  struct Entry {
    ComplexMatrix h;
    std::optional<HermitianEigen> eig;
  };
  std::vector<Entry> entries_;
  std::size_t hits_ = 0;
};

// One exact step: returns (U rho U^dagger, U) with U = exp(i H dt).
std::pair<ComplexMatrix, ComplexMatrix> step_real_time(const ComplexMatrix& rho,
                                                       const ComplexMatrix& h, double dt);

// exp(-beta H) rho_s exp(beta H); neither symmetrized nor renormalized.
ComplexMatrix to_interaction(const ComplexMatrix& rho_s, const ComplexMatrix& h, double beta);
ComplexMatrix to_interaction(const ComplexMatrix& rho_s, const HermitianEigen& h, double beta);

Trajectory run_forward(const ComplexMatrix& rho0, const ScheduleSet& s, const BetaRamp& ramp,
                       HamiltonianCache* cache = nullptr);

// sqrt(sum_ij |rho_des,ij - rho_I,ij|^2 / 4^n)
double rms_error(const ComplexMatrix& rho_i_final, const ComplexMatrix& rho_des);

// `step,row,col,abs` rows of |rho_I| every `stride` steps (plus the final step).
void write_rho_series(const Trajectory& traj, const std::filesystem::path& path, int stride = 1);
// `step,qubit,mean_spin` rows from rho_I every `stride` steps (plus the final step).
void write_step_spins(const Trajectory& traj, const std::filesystem::path& path, int stride = 1);

}  // namespace qanneal
