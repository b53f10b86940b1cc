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

#include "qanneal/propagate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "qanneal/errors.hpp"
#include "qanneal/states.hpp"

namespace qanneal {

namespace {

void check_trace(const ComplexMatrix& rho, double tol, const char* who) {
  const Complex tr = rho.trace();
  if (!(std::abs(tr - 1.0) <= tol)) {
    throw ContractError(std::string(who) + ": trace " + std::to_string(tr.real()) + " is not 1");
  }
}

std::vector<int> sampled_steps(int timesteps, int stride) {
  if (stride < 1) throw ArgumentError("stride must be >= 1");
  std::vector<int> steps;
  for (int k = 0; k <= timesteps; k += stride) steps.push_back(k);
  if (steps.back() != timesteps) steps.push_back(timesteps);
  return steps;
}

}  // namespace

double Trajectory::beta(int k) const { return beta_at(ramp, k * dt); }

ComplexMatrix Trajectory::rho_i(int k) const {
  if (k < 0 || k > timesteps()) throw ArgumentError("rho_i: step out of range");
  if (k == timesteps()) return rho_i_final;
  if (k == 0) return rho_s[0];
  return to_interaction(rho_s[static_cast<std::size_t>(k)], eigens[static_cast<std::size_t>(k - 1)],
                        beta(k));
}

double Trajectory::terminal_hermiticity_defect() const {
  return hermiticity_defect(rho_i_final);
}

const HermitianEigen& HamiltonianCache::decompose(int step, const ComplexMatrix& h) {
  const auto k = static_cast<std::size_t>(step);
  if (entries_.size() <= k) entries_.resize(k + 1);
  Entry& e = entries_[k];
  if (e.eig && e.h.rows() == h.rows() && e.h == h) {
    ++hits_;
    return *e.eig;
  }
  e.h = h;
  e.eig.emplace(h);
  return *e.eig;
}

std::pair<ComplexMatrix, ComplexMatrix> step_real_time(const ComplexMatrix& rho,
                                                       const ComplexMatrix& h, double dt) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols()) {
    throw ArgumentError("step_real_time: dimension mismatch");
  }
  require_hermitian(h, "step_real_time");
  check_trace(rho, 1e-9, "step_real_time");
  const HermitianEigen eig(h);
  ComplexMatrix u = eig.exp(Complex{0.0, dt});
  ComplexMatrix next = u * rho * u.adjoint();
  return {std::move(next), std::move(u)};
}

ComplexMatrix to_interaction(const ComplexMatrix& rho_s, const HermitianEigen& h, double beta) {
  if (beta < 0.0) throw ArgumentError("to_interaction: beta must be >= 0");
  if (rho_s.rows() != h.dim()) throw ArgumentError("to_interaction: dimension mismatch");
  const double exponent = beta * h.max_abs_eigenvalue();
  if (exponent > kMaxExponent) {
    throw OverflowError("to_interaction: exponent beta*|lambda| = " + std::to_string(exponent) +
                            " exceeds " + std::to_string(kMaxExponent),
                        exponent);
  }
  if (beta == 0.0) return rho_s;
  return h.exp(Complex{-beta, 0.0}) * rho_s * h.exp(Complex{beta, 0.0});
}

ComplexMatrix to_interaction(const ComplexMatrix& rho_s, const ComplexMatrix& h, double beta) {
  require_hermitian(h, "to_interaction");
  return to_interaction(rho_s, HermitianEigen(h), beta);
}

Trajectory run_forward(const ComplexMatrix& rho0, const ScheduleSet& s, const BetaRamp& ramp,
                       HamiltonianCache* cache) {
  s.validate();
  const auto dim = static_cast<Eigen::Index>(s.n.dim());
  if (rho0.rows() != dim || rho0.cols() != dim) throw ArgumentError("run_forward: rho0 has wrong dimension");
  require_hermitian(rho0, "run_forward");
  check_trace(rho0, 1e-9, "run_forward");
  if (std::abs(ramp.t_f - s.t_f()) > 1e-9 * std::max(1.0, s.t_f())) {
    throw ArgumentError("run_forward: beta ramp t_f does not match schedule T*dt");
  }
  if (ramp.beta_f < 0.0) throw ArgumentError("run_forward: beta_f must be >= 0");

  const auto steps = static_cast<std::size_t>(s.timesteps);
  Trajectory traj;
  traj.ramp = ramp;
  traj.dt = s.dt;
  traj.rho_s.reserve(steps + 1);
  traj.hams.reserve(steps);
  traj.eigens.reserve(steps);
  traj.step_unitaries.reserve(steps);
  traj.rho_s.push_back(rho0);

  const Complex idt{0.0, s.dt};
  for (int k = 0; k < s.timesteps; ++k) {
    ComplexMatrix h = assemble_hamiltonian(s, k);
    if (!h.allFinite()) {
      throw ContractError("run_forward: non-finite Hamiltonian at step " + std::to_string(k));
    }
    traj.eigens.push_back(cache ? cache->decompose(k, h) : HermitianEigen(h));
    traj.hams.push_back(std::move(h));
    ComplexMatrix u = traj.eigens.back().exp(idt);
    traj.rho_s.push_back(u * traj.rho_s.back() * u.adjoint());
    traj.step_unitaries.push_back(std::move(u));
  }
  try {
    traj.rho_i_final = to_interaction(traj.rho_s.back(), traj.eigens.back(), ramp.beta_f);
  } catch (const OverflowError& e) {
    throw OverflowError(std::string(e.what()) + " at step " + std::to_string(s.timesteps),
                        e.exponent(), s.timesteps);
  }
  return traj;
}

double rms_error(const ComplexMatrix& rho_i_final, const ComplexMatrix& rho_des) {
  if (rho_i_final.rows() != rho_des.rows() || rho_i_final.cols() != rho_des.cols()) {
    throw ArgumentError("rms_error: dimension mismatch");
  }
  const double entries = static_cast<double>(rho_des.size());
  return std::sqrt((rho_des - rho_i_final).squaredNorm() / entries);
}

void write_rho_series(const Trajectory& traj, const std::filesystem::path& path, int stride) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(10);
  out << "step,row,col,abs\n";
  for (int k : sampled_steps(traj.timesteps(), stride)) {
    const ComplexMatrix r = traj.rho_i(k);
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      for (Eigen::Index j = 0; j < r.cols(); ++j) {
        out << k << ',' << i << ',' << j << ',' << std::abs(r(i, j)) << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_step_spins(const Trajectory& traj, const std::filesystem::path& path, int stride) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(10);
  out << "step,qubit,mean_spin\n";
  for (int k : sampled_steps(traj.timesteps(), stride)) {
    const auto spins = spin_averages(traj.rho_i(k));
    for (std::size_t q = 0; q < spins.size(); ++q) out << k << ',' << q << ',' << spins[q] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace qanneal
