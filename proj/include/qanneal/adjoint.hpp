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

#include <functional>
#include <vector>

#include "qanneal/propagate.hpp"
#include "qanneal/schedule.hpp"
#include "qanneal/states.hpp"

namespace qanneal {

struct LossReport {
  double loss = 0.0;  // 1/2 sum_ij |rho_des - rho_I(t_f)|^2
  double rms = 0.0;
  int epoch = 0;
};

// dL/dw for every schedule entry, shaped like the ScheduleSet it differentiates.
// Frozen classes are zero-filled.
struct GradientSet {
  std::vector<Series> d_zeta;
  std::vector<Series> d_eps;
  std::vector<Series> d_kk;

  static GradientSet zeros_like(const ScheduleSet& s);
  double max_abs() const;
  bool all_finite() const;
  GradientSet operator-(const GradientSet& other) const;
  GradientSet operator+(const GradientSet& other) const;
};

struct GradientDecomposition {
  GradientSet total;
  GradientSet zero_temperature;  // gradient of 1/2 |rho_des - rho_S(t_f)|^2
  GradientSet beta_correction;   // everything the beta transform adds
};

enum class ParamClass { Zeta, Eps, Kk };

struct ParamRef {
  ParamClass cls = ParamClass::Zeta;
  int index = 0;  // pair for Zeta, qubit otherwise
  int step = 0;
};

enum class InitPolicy { Zeros, SeedSchedule };

struct TrainingConfig {
  double eta_zeta = 1.25e-5;
  double eta_eps = 5e-6;
  double eta_kk = 1.25e-5;
  // Rate for the last-step entries, the ones that also set exp(-+beta_f H(t_f)).
  double eta_terminal = 0.0;
  int max_epochs = 200;
  double stop_rms = 0.0;  // stop once rms <= stop_rms; <= 0 never stops early
  InitPolicy init_policy = InitPolicy::Zeros;
  TrainableMask trainable;

  void validate() const;
};

// Learning rates for the S_w parametrization.
// The endpoint values also set the terminal exp(-+beta_f H), so their rates are
// many orders of magnitude below the increment rate.
struct MonotoneRates {
  double eta_increments = 3e-4;
  double eta_zeta_final = 1e-11;
  double eta_eps_final = 4e-12;
};

struct TrainResult {
  ScheduleSet schedule;
  std::vector<LossReport> history;
  ComplexMatrix final_rho_i;  // rho_I(t_f) of `schedule`, matching history.back()
};

struct MonotoneGradient {
  Series d_increments;
  Series d_zeta_final;
  Series d_eps_final;
};

struct MonotoneTrainResult {
  MonotoneSchedule schedule;
  std::vector<LossReport> history;
  ComplexMatrix final_rho_i;
};

struct GammaResult {
  double gamma = 0.0;
  TrainResult training;
  std::vector<double> spins;  // <sigma_z> of the trained rho_I(t_f)
};

using EpochCallback = std::function<void(const LossReport&)>;
// Sees the schedule that produced each report.
using MonotoneCallback = std::function<void(const MonotoneSchedule&, const LossReport&)>;

LossReport loss(const Trajectory& traj, const ComplexMatrix& rho_des);

// Exact reverse-mode derivative of the discretized forward pass.
GradientSet gradient(const Trajectory& traj, const ScheduleSet& s, const BetaRamp& ramp,
                     const ComplexMatrix& rho_des);

// Forward-mode derivative of 1/2 |rho_des - rho_S(t_f)|^2, ignoring temperature.
GradientSet zero_temperature_gradient(const Trajectory& traj, const ScheduleSet& s,
                                      const ComplexMatrix& rho_des);

GradientDecomposition decompose_gradient(const Trajectory& traj, const ScheduleSet& s,
                                         const BetaRamp& ramp, const ComplexMatrix& rho_des);

double evaluate_loss(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                     const ComplexMatrix& rho_des, HamiltonianCache* cache = nullptr);

double fd_component(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                    const ComplexMatrix& rho_des, const ParamRef& param, double h,
                    HamiltonianCache* cache = nullptr);

// Central differences over every trainable entry (2 forward runs each).
GradientSet fd_gradient(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                        const ComplexMatrix& rho_des, double h);

double& param_value(ScheduleSet& s, const ParamRef& param);
double param_grad(const GradientSet& g, const ParamRef& param);

// w <- w - eta * dL/dw for each trainable class.
void apply_update(ScheduleSet& s, const GradientSet& g, const TrainingConfig& cfg);

TrainResult train(const TrainingConfig& cfg, const ScheduleSet& s0, const BetaRamp& ramp,
                  const ComplexMatrix& rho0, const ComplexMatrix& rho_des,
                  const EpochCallback& on_epoch = {});

MonotoneGradient monotone_gradient(const MonotoneSchedule& m, double k0, const GradientSet& g);

MonotoneTrainResult train_monotone(const TrainingConfig& cfg, const MonotoneRates& rates,
                                   const MonotoneSchedule& m0, double k0, const BetaRamp& ramp,
                                   const ComplexMatrix& rho0, const ComplexMatrix& rho_des,
                                   const MonotoneCallback& on_epoch = {});

// n-qubit seed from a trained (n-1)-qubit schedule: every pair gets the mean
// trained pair coupling, eps = 0, and the trained K ramp is kept.
ScheduleSet size_bootstrap_seed(const ScheduleSet& trained, QubitCount n);

// Seeds from `trained` and trains flat -> GHZ_n.
TrainResult bootstrap_size(const ScheduleSet& trained, QubitCount n, const TrainingConfig& cfg,
                           const BetaRamp& ramp, const EpochCallback& on_epoch = {});

// Walks the gamma grid, each gamma warm-started from the previous one.
std::vector<GammaResult> bootstrap_gamma(const PathSpec& path, const TrainingConfig& cfg,
                                         const ScheduleSet& s0, const BetaRamp& ramp,
                                         const ComplexMatrix& rho0,
                                         const std::function<void(double, const LossReport&)>&
                                             on_epoch = {});

}  // namespace qanneal
