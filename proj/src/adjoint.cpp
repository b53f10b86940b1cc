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

#include "qanneal/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qanneal/errors.hpp"

namespace qanneal {

namespace {

// Pauli diagonals and flip masks for one qubit count, built once per call.
struct Generators {
  explicit Generators(QubitCount n) : n(n) {
    for (int a = 0; a < n.value(); ++a) {
      z.push_back(z_diagonal(a, n));
      flip.push_back(Eigen::Index{1} << (n.value() - 1 - a));
    }
    for (int p = 0; p < n.pairs(); ++p) {
      const auto [a, b] = pair_sites(p, n);
      zz.push_back(z[static_cast<std::size_t>(a)].cwiseProduct(z[static_cast<std::size_t>(b)]));
    }
  }

  ComplexMatrix x_matrix(int a) const { return embed_pauli(PauliAxis::X, a, n); }
  ComplexMatrix diag_matrix(const Eigen::VectorXd& d) const {
    return d.cast<Complex>().asDiagonal();
  }

  QubitCount n;
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> zz;
  std::vector<Eigen::Index> flip;
};

double real_part_checked(Complex v, double scale) {
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, scale)) {
    throw ContractError("gradient component has imaginary part " + std::to_string(v.imag()));
  }
  return v.real();
}

// dL/dw = Re tr(H_bar^dagger dH/dw) for every generator, written into step k.
void accumulate_step(const ComplexMatrix& hbar, const Generators& gen, const TrainableMask& mask,
                     int k, GradientSet& g) {
  const ComplexMatrix herm = 0.5 * (hbar + hbar.adjoint());
  const double scale = herm.norm();
  const auto step = static_cast<std::size_t>(k);
  const ComplexVector diag = herm.diagonal();
  if (mask.zeta) {
    for (std::size_t p = 0; p < gen.zz.size(); ++p) {
      g.d_zeta[p][step] = real_part_checked(diag.dot(gen.zz[p].cast<Complex>()), scale);
    }
  }
  if (mask.eps) {
    for (std::size_t a = 0; a < gen.z.size(); ++a) {
      g.d_eps[a][step] = real_part_checked(diag.dot(gen.z[a].cast<Complex>()), scale);
    }
  }
  if (mask.kk) {
    for (std::size_t a = 0; a < gen.flip.size(); ++a) {
      Complex sum{0.0, 0.0};
      for (Eigen::Index i = 0; i < herm.rows(); ++i) sum += herm(i ^ gen.flip[a], i);
      g.d_kk[a][step] = real_part_checked(sum, scale);
    }
  }
}

// Pulls a cotangent on rho_s(t_f) back through every real-time step.
// `terminal_hbar` is an extra Hamiltonian cotangent for the last step.
GradientSet backpropagate(const Trajectory& traj, const ScheduleSet& s, ComplexMatrix cotangent,
                          const ComplexMatrix& terminal_hbar) {
  GradientSet g = GradientSet::zeros_like(s);
  const Generators gen(s.n);
  const Complex idt{0.0, s.dt};
  for (int k = s.timesteps - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const ComplexMatrix& u = traj.step_unitaries[i];
    const ComplexMatrix& rho = traj.rho_s[i];
    // rho' = U rho U^dagger  =>  U_bar = (G + G^dagger) U rho for Hermitian rho.
    const ComplexMatrix ubar = (cotangent + cotangent.adjoint()) * u * rho;
    ComplexMatrix hbar = traj.eigens[i].exp_derivative_adjoint(idt, ubar);
    if (k == s.timesteps - 1) hbar += terminal_hbar;
    accumulate_step(hbar, gen, s.trainable, k, g);
    cotangent = u.adjoint() * cotangent * u;
  }
  return g;
}

void check_consistent(const Trajectory& traj, const ScheduleSet& s, const ComplexMatrix& rho_des) {
  s.validate();
  if (traj.timesteps() != s.timesteps || traj.rho_s.size() != traj.hams.size() + 1 ||
      traj.step_unitaries.size() != traj.hams.size() || traj.eigens.size() != traj.hams.size()) {
    throw ArgumentError("gradient: trajectory does not match schedule");
  }
  if (std::abs(traj.dt - s.dt) > 1e-15 * std::max(1.0, s.dt)) {
    throw ArgumentError("gradient: trajectory dt does not match schedule");
  }
  const auto dim = static_cast<Eigen::Index>(s.n.dim());
  if (rho_des.rows() != dim || rho_des.cols() != dim) {
    throw ArgumentError("gradient: target has wrong dimension");
  }
}

struct TerminalAdjoint {
  ComplexMatrix cotangent;  // on rho_s(t_f)
  ComplexMatrix hbar;       // on H(t_f) via exp(-+beta_f H)
};

TerminalAdjoint terminal_adjoint(const Trajectory& traj, double beta_f,
                                 const ComplexMatrix& rho_des) {
  const ComplexMatrix& rho = traj.rho_s.back();
  const HermitianEigen& eig = traj.eigens.back();
  const ComplexMatrix diff = traj.rho_i_final - rho_des;
  const Eigen::Index d = rho.rows();
  if (beta_f == 0.0) return {diff, ComplexMatrix::Zero(d, d)};
  // rho_I = A rho B, A = exp(-beta H), B = exp(beta H) = A^-1.
  const ComplexMatrix a = eig.exp(Complex{-beta_f, 0.0});
  const ComplexMatrix b = eig.exp(Complex{beta_f, 0.0});
  const ComplexMatrix abar = diff * (rho * b).adjoint();
  const ComplexMatrix bbar = (a * rho).adjoint() * diff;
  ComplexMatrix hbar = eig.exp_derivative_adjoint(Complex{-beta_f, 0.0}, abar) +
                       eig.exp_derivative_adjoint(Complex{beta_f, 0.0}, bbar);
  return {a * diff * b, std::move(hbar)};
}

template <typename F>
void for_each_series(GradientSet& g, F&& f) {
  for (auto& s : g.d_zeta) f(s);
  for (auto& s : g.d_eps) f(s);
  for (auto& s : g.d_kk) f(s);
}

GradientSet combine(const GradientSet& a, const GradientSet& b, double sign) {
  GradientSet out = a;
  auto apply = [sign](std::vector<Series>& x, const std::vector<Series>& y) {
    if (x.size() != y.size()) throw ArgumentError("gradient shapes differ");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size()) throw ArgumentError("gradient shapes differ");
      for (std::size_t k = 0; k < x[i].size(); ++k) x[i][k] += sign * y[i][k];
    }
  };
  apply(out.d_zeta, b.d_zeta);
  apply(out.d_eps, b.d_eps);
  apply(out.d_kk, b.d_kk);
  return out;
}

bool class_trainable(const TrainableMask& mask, ParamClass cls) {
  switch (cls) {
    case ParamClass::Zeta: return mask.zeta;
    case ParamClass::Eps: return mask.eps;
    case ParamClass::Kk: return mask.kk;
  }
  return false;
}

}  // namespace

GradientSet GradientSet::zeros_like(const ScheduleSet& s) {
  GradientSet g;
  const Series zero(static_cast<std::size_t>(s.timesteps), 0.0);
  g.d_zeta.assign(s.zeta.size(), zero);
  g.d_eps.assign(s.eps.size(), zero);
  g.d_kk.assign(s.kk.size(), zero);
  return g;
}

double GradientSet::max_abs() const {
  double m = 0.0;
  auto self = *this;
  for_each_series(self, [&m](const Series& s) {
    for (double v : s) m = std::max(m, std::abs(v));
  });
  return m;
}

bool GradientSet::all_finite() const {
  bool ok = true;
  auto self = *this;
  for_each_series(self, [&ok](const Series& s) {
    for (double v : s) ok = ok && std::isfinite(v);
  });
  return ok;
}

GradientSet GradientSet::operator-(const GradientSet& other) const { return combine(*this, other, -1.0); }
GradientSet GradientSet::operator+(const GradientSet& other) const { return combine(*this, other, 1.0); }

void TrainingConfig::validate() const {
  std::vector<std::string> bad;
  if (trainable.zeta && !(eta_zeta > 0.0)) bad.push_back("eta_zeta must be > 0");
  if (trainable.eps && !(eta_eps > 0.0)) bad.push_back("eta_eps must be > 0");
  if (trainable.kk && !(eta_kk > 0.0)) bad.push_back("eta_kk must be > 0");
  if (!(eta_terminal >= 0.0)) bad.push_back("eta_terminal must be >= 0");
  if (max_epochs < 1) bad.push_back("max_epochs must be >= 1");
  if (!bad.empty()) throw ConfigError(bad);
}

LossReport loss(const Trajectory& traj, const ComplexMatrix& rho_des) {
  const ComplexMatrix& final = traj.rho_i_final;
  if (final.rows() != rho_des.rows() || final.cols() != rho_des.cols()) {
    throw ArgumentError("loss: dimension mismatch");
  }
  LossReport r;
  r.loss = 0.5 * (rho_des - final).squaredNorm();
  r.rms = rms_error(final, rho_des);
  return r;
}

GradientSet gradient(const Trajectory& traj, const ScheduleSet& s, const BetaRamp& ramp,
                     const ComplexMatrix& rho_des) {
  check_consistent(traj, s, rho_des);
  TerminalAdjoint t = terminal_adjoint(traj, ramp.beta_f, rho_des);
  return backpropagate(traj, s, std::move(t.cotangent), t.hbar);
}

GradientSet zero_temperature_gradient(const Trajectory& traj, const ScheduleSet& s,
                                      const ComplexMatrix& rho_des) {
  check_consistent(traj, s, rho_des);
  GradientSet g = GradientSet::zeros_like(s);
  const Generators gen(s.n);
  const Complex idt{0.0, s.dt};

  // Directional derivatives of each step against the backward-propagated residual.
  ComplexMatrix cotangent = traj.rho_s.back() - rho_des;
  for (int k = s.timesteps - 1; k >= 0; --k) {
    const auto i = static_cast<std::size_t>(k);
    const ComplexMatrix& u = traj.step_unitaries[i];
    const ComplexMatrix& rho = traj.rho_s[i];
    auto directional = [&](const ComplexMatrix& generator) {
      const ComplexMatrix du = traj.eigens[i].exp_derivative(idt, generator);
      const ComplexMatrix drho = du * rho * u.adjoint() + u * rho * du.adjoint();
      return (cotangent.adjoint() * drho).trace().real();
    };
    if (s.trainable.zeta) {
      for (std::size_t p = 0; p < gen.zz.size(); ++p) g.d_zeta[p][i] = directional(gen.diag_matrix(gen.zz[p]));
    }
    if (s.trainable.eps) {
      for (std::size_t a = 0; a < gen.z.size(); ++a) g.d_eps[a][i] = directional(gen.diag_matrix(gen.z[a]));
    }
    if (s.trainable.kk) {
      for (int a = 0; a < s.n.value(); ++a) g.d_kk[static_cast<std::size_t>(a)][i] = directional(gen.x_matrix(a));
    }
    cotangent = u.adjoint() * cotangent * u;
  }
  return g;
}

GradientDecomposition decompose_gradient(const Trajectory& traj, const ScheduleSet& s,
                                         const BetaRamp& ramp, const ComplexMatrix& rho_des) {
  check_consistent(traj, s, rho_des);
  GradientDecomposition out;
  TerminalAdjoint t = terminal_adjoint(traj, ramp.beta_f, rho_des);
  const ComplexMatrix residual_s = traj.rho_s.back() - rho_des;
  out.total = backpropagate(traj, s, t.cotangent, t.hbar);
  out.zero_temperature = zero_temperature_gradient(traj, s, rho_des);
  out.beta_correction = backpropagate(traj, s, t.cotangent - residual_s, t.hbar);
  return out;
}

double evaluate_loss(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                     const ComplexMatrix& rho_des, HamiltonianCache* cache) {
  return loss(run_forward(rho0, s, ramp, cache), rho_des).loss;
}

double& param_value(ScheduleSet& s, const ParamRef& param) {
  std::vector<Series>* family = nullptr;
  switch (param.cls) {
    case ParamClass::Zeta: family = &s.zeta; break;
    case ParamClass::Eps: family = &s.eps; break;
    case ParamClass::Kk: family = &s.kk; break;
  }
  if (param.index < 0 || static_cast<std::size_t>(param.index) >= family->size() ||
      param.step < 0 || param.step >= s.timesteps) {
    throw ArgumentError("parameter reference out of range");
  }
  return (*family)[static_cast<std::size_t>(param.index)][static_cast<std::size_t>(param.step)];
}

double param_grad(const GradientSet& g, const ParamRef& param) {
  const std::vector<Series>* family = nullptr;
  switch (param.cls) {
    case ParamClass::Zeta: family = &g.d_zeta; break;
    case ParamClass::Eps: family = &g.d_eps; break;
    case ParamClass::Kk: family = &g.d_kk; break;
  }
  return family->at(static_cast<std::size_t>(param.index)).at(static_cast<std::size_t>(param.step));
}

double fd_component(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                    const ComplexMatrix& rho_des, const ParamRef& param, double h,
                    HamiltonianCache* cache) {
  if (!(h > 0.0)) throw ArgumentError("fd step must be > 0");
  if (!class_trainable(s.trainable, param.cls)) return 0.0;
  ScheduleSet work = s;
  double& w = param_value(work, param);
  const double w0 = w;
  w = w0 + h;
  const double up = evaluate_loss(work, ramp, rho0, rho_des, cache);
  w = w0 - h;
  const double down = evaluate_loss(work, ramp, rho0, rho_des, cache);
  return (up - down) / (2.0 * h);
}

GradientSet fd_gradient(const ScheduleSet& s, const BetaRamp& ramp, const ComplexMatrix& rho0,
                        const ComplexMatrix& rho_des, double h) {
  GradientSet g = GradientSet::zeros_like(s);
  HamiltonianCache cache;
  auto sweep = [&](ParamClass cls, std::vector<Series>& out) {
    if (!class_trainable(s.trainable, cls)) return;
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int k = 0; k < s.timesteps; ++k) {
        out[i][static_cast<std::size_t>(k)] =
            fd_component(s, ramp, rho0, rho_des, ParamRef{cls, static_cast<int>(i), k}, h, &cache);
      }
    }
  };
  sweep(ParamClass::Zeta, g.d_zeta);
  sweep(ParamClass::Eps, g.d_eps);
  sweep(ParamClass::Kk, g.d_kk);
  return g;
}

void apply_update(ScheduleSet& s, const GradientSet& g, const TrainingConfig& cfg) {
  const std::size_t last = static_cast<std::size_t>(s.timesteps - 1);
  auto step = [&](std::vector<Series>& w, const std::vector<Series>& dw, double eta) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t k = 0; k < last; ++k) w[i][k] -= eta * dw[i][k];
      w[i][last] -= cfg.eta_terminal * dw[i][last];
    }
  };
  if (cfg.trainable.zeta) step(s.zeta, g.d_zeta, cfg.eta_zeta);
  if (cfg.trainable.eps) step(s.eps, g.d_eps, cfg.eta_eps);
  if (cfg.trainable.kk) step(s.kk, g.d_kk, cfg.eta_kk);
}

namespace {

Trajectory forward_or_diverge(const ComplexMatrix& rho0, const ScheduleSet& s,
                              const BetaRamp& ramp, int epoch) {
  try {
    return run_forward(rho0, s, ramp);
  } catch (const OverflowError& e) {
    throw DivergedError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what(),
                        epoch);
  }
}

LossReport checked_loss(const Trajectory& traj, const ComplexMatrix& rho_des, int epoch) {
  LossReport r = loss(traj, rho_des);
  r.epoch = epoch;
  if (!std::isfinite(r.loss)) {
    throw DivergedError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite",
                        epoch);
  }
  return r;
}

}  // namespace

TrainResult train(const TrainingConfig& cfg, const ScheduleSet& s0, const BetaRamp& ramp,
                  const ComplexMatrix& rho0, const ComplexMatrix& rho_des,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  TrainResult result;
  result.schedule = s0;
  result.schedule.trainable = cfg.trainable;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const Trajectory traj = forward_or_diverge(rho0, result.schedule, ramp, epoch);
    const LossReport report = checked_loss(traj, rho_des, epoch);
    result.history.push_back(report);
    result.final_rho_i = traj.rho_i_final;
    if (on_epoch) on_epoch(report);
    if (cfg.stop_rms > 0.0 && report.rms <= cfg.stop_rms) break;
    if (epoch + 1 == cfg.max_epochs) break;
    const GradientSet g = gradient(traj, result.schedule, ramp, rho_des);
    if (!g.all_finite()) {
      throw DivergedError("training diverged at epoch " + std::to_string(epoch) +
                              ": gradient is not finite",
                          epoch);
    }
    apply_update(result.schedule, g, cfg);
  }
  return result;
}

MonotoneGradient monotone_gradient(const MonotoneSchedule& m, double k0, const GradientSet& g) {
  const Series f = annealing_fraction(m);
  const std::size_t steps = f.size();
  double range = 0.0;
  for (double inc : m.increments) range += inc;

  // dL/df_k, f_k being the annealing fraction at step k.
  Series df(steps, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    double v = 0.0;
    for (std::size_t p = 0; p < m.zeta_final.size(); ++p) v += g.d_zeta[p][k] * m.zeta_final[p];
    for (std::size_t a = 0; a < m.eps_final.size(); ++a) {
      v += g.d_eps[a][k] * m.eps_final[a];
      v -= g.d_kk[a][k] * k0;
    }
    df[k] = v;
  }
  // df_k / dinc_j = ([j <= k] - f_k) / range
  double weighted = 0.0;
  for (std::size_t k = 0; k < steps; ++k) weighted += df[k] * f[k];
  MonotoneGradient out;
  out.d_increments.assign(steps, 0.0);
  double tail = 0.0;
  for (std::size_t j = steps; j-- > 0;) {
    tail += df[j];
    out.d_increments[j] = (tail - weighted) / range;
  }
  out.d_zeta_final.assign(m.zeta_final.size(), 0.0);
  out.d_eps_final.assign(m.eps_final.size(), 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t p = 0; p < m.zeta_final.size(); ++p) out.d_zeta_final[p] += g.d_zeta[p][k] * f[k];
    for (std::size_t a = 0; a < m.eps_final.size(); ++a) out.d_eps_final[a] += g.d_eps[a][k] * f[k];
  }
  return out;
}

MonotoneTrainResult train_monotone(const TrainingConfig& cfg, const MonotoneRates& rates,
                                   const MonotoneSchedule& m0, double k0, const BetaRamp& ramp,
                                   const ComplexMatrix& rho0, const ComplexMatrix& rho_des,
                                   const MonotoneCallback& on_epoch) {
  if (cfg.max_epochs < 1) throw ConfigError({"max_epochs must be >= 1"});
  MonotoneTrainResult result;
  result.schedule = m0;
  MonotoneSchedule& m = result.schedule;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const ScheduleSet s = expand_monotone(m, k0);
    const Trajectory traj = forward_or_diverge(rho0, s, ramp, epoch);
    const LossReport report = checked_loss(traj, rho_des, epoch);
    result.history.push_back(report);
    result.final_rho_i = traj.rho_i_final;
    if (on_epoch) on_epoch(m, report);
    if (cfg.stop_rms > 0.0 && report.rms <= cfg.stop_rms) break;
    if (epoch + 1 == cfg.max_epochs) break;
    const MonotoneGradient g = monotone_gradient(m, k0, gradient(traj, s, ramp, rho_des));
    for (std::size_t j = 0; j < m.increments.size(); ++j) {
      const double next = m.increments[j] - rates.eta_increments * g.d_increments[j];
      if (!std::isfinite(next)) {
        throw DivergedError("S_w training diverged at epoch " + std::to_string(epoch), epoch);
      }
      m.increments[j] = std::max(0.0, next);
    }
    if (cfg.trainable.zeta) {
      for (std::size_t p = 0; p < m.zeta_final.size(); ++p) m.zeta_final[p] -= rates.eta_zeta_final * g.d_zeta_final[p];
    }
    if (cfg.trainable.eps) {
      for (std::size_t a = 0; a < m.eps_final.size(); ++a) m.eps_final[a] -= rates.eta_eps_final * g.d_eps_final[a];
    }
    annealing_fraction(m);  // throws if clamping collapsed the S_w range
  }
  return result;
}

ScheduleSet size_bootstrap_seed(const ScheduleSet& trained, QubitCount n) {
  if (n.value() < 3) throw ArgumentError("size bootstrap needs n >= 3");
  if (trained.n.value() != n.value() - 1) {
    throw ArgumentError("size bootstrap needs a schedule trained on n - 1 qubits");
  }
  trained.validate();
  Series mean(static_cast<std::size_t>(trained.timesteps), 0.0);
  for (const auto& series : trained.zeta) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += series[k];
  }
  for (double& v : mean) v /= static_cast<double>(trained.zeta.size());

  ScheduleSet seed = ScheduleSet::zeros(n, trained.timesteps, trained.dt);
  seed.zeta = lift_pair_schedule(mean, n);
  for (auto& k : seed.kk) k = trained.kk.front();
  seed.trainable = trained.trainable;
  return seed;
}

TrainResult bootstrap_size(const ScheduleSet& trained, QubitCount n, const TrainingConfig& cfg,
                           const BetaRamp& ramp, const EpochCallback& on_epoch) {
  const ScheduleSet seed = size_bootstrap_seed(trained, n);
  return train(cfg, seed, ramp, flat_state(n), ghz_state(n), on_epoch);
}

std::vector<GammaResult> bootstrap_gamma(const PathSpec& path, const TrainingConfig& cfg,
                                         const ScheduleSet& s0, const BetaRamp& ramp,
                                         const ComplexMatrix& rho0,
                                         const std::function<void(double, const LossReport&)>& on_epoch) {
  path.validate();
  if (!(s0.n == path.n)) throw ArgumentError("bootstrap_gamma: schedule and path sizes differ");
  std::vector<GammaResult> results;
  ScheduleSet current = s0;
  for (double gamma : path.gamma_grid) {
    const ComplexMatrix target = path_state(path, gamma).density();
    EpochCallback cb;
    if (on_epoch) cb = [&on_epoch, gamma](const LossReport& r) { on_epoch(gamma, r); };
    GammaResult entry;
    entry.gamma = gamma;
    try {
      entry.training = train(cfg, current, ramp, rho0, target, cb);
    } catch (const DivergedError& e) {
      throw DivergedError("gamma = " + std::to_string(gamma) + ": " + e.what(), e.epoch());
    }
    entry.spins = spin_averages(entry.training.final_rho_i);
    current = entry.training.schedule;
    results.push_back(std::move(entry));
  }
  return results;
}

}  // namespace qanneal
