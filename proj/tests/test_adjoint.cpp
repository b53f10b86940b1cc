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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "qanneal/adjoint.hpp"
#include "qanneal/errors.hpp"
#include "support.hpp"

using namespace qanneal;
using qanneal::testing::Rng;

namespace {

struct Instance {
  ScheduleSet schedule;
  BetaRamp ramp;
  ComplexMatrix rho0;
  ComplexMatrix rho_des;
};

Instance random_instance(Rng& rng, double beta_f, int steps = 8) {
  Instance in;
  in.schedule = rng.schedule(QubitCount(2), steps, 2.5, 0.01);
  in.ramp = {beta_f, in.schedule.t_f()};
  in.rho0 = rng.density(4);
  in.rho_des = rng.density(4);
  return in;
}

// Largest relative deviation over components whose reference magnitude exceeds `floor`.
double worst_relative(const GradientSet& got, const GradientSet& ref, double floor = 1e-12) {
  double worst = 0.0;
  auto scan = [&](const std::vector<Series>& a, const std::vector<Series>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        if (std::abs(b[i][k]) <= floor) continue;
        worst = std::max(worst, std::abs(a[i][k] - b[i][k]) / std::abs(b[i][k]));
      }
    }
  };
  scan(got.d_zeta, ref.d_zeta);
  scan(got.d_eps, ref.d_eps);
  scan(got.d_kk, ref.d_kk);
  return worst;
}

double dot(const GradientSet& a, const GradientSet& b) {
  double sum = 0.0;
  auto acc = [&](const std::vector<Series>& x, const std::vector<Series>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t k = 0; k < x[i].size(); ++k) sum += x[i][k] * y[i][k];
    }
  };
  acc(a.d_zeta, b.d_zeta);
  acc(a.d_eps, b.d_eps);
  acc(a.d_kk, b.d_kk);
  return sum;
}

}  // namespace

TEST_CASE("loss examples") {
  const QubitCount two(2);
  const Trajectory same = run_forward(ghz_state(two), ScheduleSet::zeros(two, 2, 1.0), {0.0, 2.0});
  CHECK(loss(same, ghz_state(two)).loss == 0.0);
  const Trajectory flat = run_forward(flat_state(two), ScheduleSet::zeros(two, 2, 1.0), {0.0, 2.0});
  const LossReport r = loss(flat, ghz_state(two));
  CHECK(r.loss == doctest::Approx(0.5));
  CHECK(r.rms * r.rms * 16.0 / 2.0 == doctest::Approx(r.loss).epsilon(1e-14));
  CHECK_THROWS_AS(loss(flat, ghz_state(QubitCount(3))), ArgumentError);
}

TEST_CASE("gradient vanishes at a commuting fixed point") {
  ScheduleSet s = ScheduleSet::zeros(QubitCount(2), 6, 1.0);
  for (auto& z : s.zeta) std::fill(z.begin(), z.end(), 0.3);
  s.trainable = {true, true, true};
  ComplexMatrix rho0 = ComplexMatrix::Zero(4, 4);
  rho0.diagonal() << 0.4, 0.3, 0.2, 0.1;
  const BetaRamp ramp{0.0, s.t_f()};
  const Trajectory t = run_forward(rho0, s, ramp);
  CHECK(gradient(t, s, ramp, rho0).max_abs() < 1e-15);
}

TEST_CASE("adjoint gradient matches central differences") {
  Rng rng(41);
  for (double beta : {0.0, 10.0, 100.0}) {
    for (int trial = 0; trial < 3; ++trial) {
      const Instance in = random_instance(rng, beta);
      const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
      const GradientSet g = gradient(t, in.schedule, in.ramp, in.rho_des);
      const GradientSet fd = fd_gradient(in.schedule, in.ramp, in.rho0, in.rho_des, 1e-6);
      CAPTURE(beta);
      CHECK(worst_relative(g, fd) < 1e-4);
      CHECK(g.all_finite());
    }
  }
}

TEST_CASE("gradient respects the trainable mask") {
  Rng rng(42);
  Instance in = random_instance(rng, 10.0);
  in.schedule.trainable = {true, false, false};
  const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
  const GradientSet g = gradient(t, in.schedule, in.ramp, in.rho_des);
  for (const auto& s : g.d_eps) CHECK(*std::max_element(s.begin(), s.end()) == 0.0);
  for (const auto& s : g.d_kk) CHECK(*std::max_element(s.begin(), s.end()) == 0.0);
  CHECK(fd_component(in.schedule, in.ramp, in.rho0, in.rho_des, {ParamClass::Eps, 0, 2}, 1e-6) == 0.0);
  CHECK(g.max_abs() > 0.0);
}

TEST_CASE("gradient shape mismatches are rejected") {
  Rng rng(43);
  const Instance in = random_instance(rng, 10.0);
  const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
  const ScheduleSet shorter = rng.schedule(QubitCount(2), 5, 2.5, 0.01);
  CHECK_THROWS_AS(gradient(t, shorter, in.ramp, in.rho_des), ArgumentError);
  CHECK_THROWS_AS(gradient(t, in.schedule, in.ramp, ghz_state(QubitCount(3))), ArgumentError);
}

TEST_CASE("zero-temperature reduction") {
  Rng rng(44);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance in = random_instance(rng, 0.0);
    const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
    const GradientDecomposition d = decompose_gradient(t, in.schedule, in.ramp, in.rho_des);
    CHECK(d.beta_correction.max_abs() == 0.0);
    CHECK((d.total - d.zero_temperature).max_abs() < 1e-12);
  }
  const Instance hot = random_instance(rng, 50.0);
  const Trajectory t = run_forward(hot.rho0, hot.schedule, hot.ramp);
  const GradientDecomposition d = decompose_gradient(t, hot.schedule, hot.ramp, hot.rho_des);
  CHECK(d.beta_correction.max_abs() > 0.0);
  // The zero-temperature part also matches differences of the beta = 0 loss.
  const GradientSet fd0 = fd_gradient(hot.schedule, {0.0, hot.ramp.t_f}, hot.rho0, hot.rho_des, 1e-6);
  CHECK(worst_relative(d.zero_temperature, fd0) < 1e-4);
}

TEST_CASE("fd gradient step sweep has a V-shaped error") {
  Rng rng(45);
  const Instance in = random_instance(rng, 10.0);
  const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
  const GradientSet g = gradient(t, in.schedule, in.ramp, in.rho_des);
  const ParamRef p{ParamClass::Zeta, 0, 3};
  std::vector<double> err;
  for (double h : {1e-2, 1e-3, 1e-5, 1e-11}) {
    err.push_back(std::abs(fd_component(in.schedule, in.ramp, in.rho0, in.rho_des, p, h) - param_grad(g, p)));
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  CHECK(err[3] > err[2]);
  CHECK_THROWS_AS(fd_component(in.schedule, in.ramp, in.rho0, in.rho_des, p, 0.0), ArgumentError);
}

TEST_CASE("small descent steps decrease the loss") {
  Rng rng(46);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = random_instance(rng, trial % 2 ? 10.0 : 0.0);
    const Trajectory t = run_forward(in.rho0, in.schedule, in.ramp);
    const GradientSet g = gradient(t, in.schedule, in.ramp, in.rho_des);
    const double before = loss(t, in.rho_des).loss;
    TrainingConfig cfg;
    cfg.trainable = {true, true, true};
    double eta = 1.0;
    double after = before;
    for (int halving = 0; halving < 60; ++halving) {
      cfg.eta_zeta = cfg.eta_eps = cfg.eta_kk = cfg.eta_terminal = eta;
      ScheduleSet next = in.schedule;
      apply_update(next, g, cfg);
      after = evaluate_loss(next, in.ramp, in.rho0, in.rho_des);
      if (after < before) break;
      eta *= 0.5;
    }
    CHECK(after < before);
  }
}

TEST_CASE("apply_update uses the terminal rate for the last step") {
  ScheduleSet s = ScheduleSet::zeros(QubitCount(2), 3, 1.0);
  GradientSet g = GradientSet::zeros_like(s);
  g.d_zeta[0] = {1.0, 1.0, 1.0};
  TrainingConfig cfg;
  cfg.eta_zeta = 0.5;
  cfg.eta_terminal = 0.0;
  apply_update(s, g, cfg);
  CHECK(s.zeta[0] == Series{-0.5, -0.5, 0.0});
  cfg.eta_terminal = 0.25;
  apply_update(s, g, cfg);
  CHECK(s.zeta[0] == Series{-1.0, -1.0, -0.25});
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eta_zeta = 0.0;
  cfg.max_epochs = 0;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() == 2);
  }
}

TEST_CASE("train reports exactly max_epochs when the threshold is never met") {
  Rng rng(47);
  const Instance in = random_instance(rng, 10.0, 6);
  TrainingConfig cfg;
  cfg.max_epochs = 7;
  cfg.stop_rms = 1e-300;
  const TrainResult r = train(cfg, in.schedule, in.ramp, in.rho0, in.rho_des);
  REQUIRE(r.history.size() == 7);
  for (int e = 0; e < 7; ++e) CHECK(r.history[static_cast<std::size_t>(e)].epoch == e);
  const LossReport last = loss(run_forward(in.rho0, r.schedule, in.ramp), in.rho_des);
  CHECK(last.loss == r.history.back().loss);
  CHECK(r.final_rho_i == run_forward(in.rho0, r.schedule, in.ramp).rho_i_final);
}

TEST_CASE("train stops at the rms threshold") {
  Rng rng(48);
  const ComplexMatrix rho = rng.density(4);
  ScheduleSet s = ScheduleSet::zeros(QubitCount(2), 4, 1.0);
  TrainingConfig cfg;
  cfg.stop_rms = 1e-9;
  const TrainResult r = train(cfg, s, {0.0, 4.0}, rho, rho);
  CHECK(r.history.size() == 1);
}

TEST_CASE("train is deterministic") {
  Rng rng(49);
  const Instance in = random_instance(rng, 10.0, 6);
  TrainingConfig cfg;
  cfg.max_epochs = 5;
  cfg.eta_zeta = 1e-2;
  const TrainResult a = train(cfg, in.schedule, in.ramp, in.rho0, in.rho_des);
  const TrainResult b = train(cfg, in.schedule, in.ramp, in.rho0, in.rho_des);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].loss == b.history[i].loss);
  CHECK(a.schedule.zeta == b.schedule.zeta);
}

TEST_CASE("train raises on divergence") {
  Rng rng(50);
  const Instance in = random_instance(rng, 100.0, 6);
  TrainingConfig cfg;
  cfg.eta_zeta = 1e6;
  cfg.eta_terminal = 1e6;
  cfg.max_epochs = 50;
  CHECK_THROWS_AS(train(cfg, in.schedule, in.ramp, in.rho0, in.rho_des), DivergedError);
}

TEST_CASE("monotone gradient follows the chain rule") {
  Rng rng(51);
  const QubitCount two(2);
  MonotoneSchedule m = MonotoneSchedule::uniform(two, 6, 2.5);
  for (double& inc : m.increments) inc = rng.uniform(0.05, 1.0);
  m.zeta_final = {0.02};
  m.eps_final = {0.01, -0.015};
  const double k0 = 0.03;
  const BetaRamp ramp{5.0, 15.0};
  const ComplexMatrix rho0 = flat_state(two);
  const ComplexMatrix rho_des = rng.density(4);
  const ScheduleSet s = expand_monotone(m, k0);
  const MonotoneGradient g =
      monotone_gradient(m, k0, gradient(run_forward(rho0, s, ramp), s, ramp, rho_des));
  auto loss_of = [&](const MonotoneSchedule& x) { return evaluate_loss(expand_monotone(x, k0), ramp, rho0, rho_des); };
  const double h = 1e-6;
  for (std::size_t j = 0; j < m.increments.size(); ++j) {
    MonotoneSchedule up = m, down = m;
    up.increments[j] += h;
    down.increments[j] -= h;
    CHECK(g.d_increments[j] == doctest::Approx((loss_of(up) - loss_of(down)) / (2 * h)).epsilon(1e-5));
  }
  MonotoneSchedule up = m, down = m;
  up.zeta_final[0] += h;
  down.zeta_final[0] -= h;
  CHECK(g.d_zeta_final[0] == doctest::Approx((loss_of(up) - loss_of(down)) / (2 * h)).epsilon(1e-5));
  for (std::size_t a = 0; a < 2; ++a) {
    MonotoneSchedule eu = m, ed = m;
    eu.eps_final[a] += h;
    ed.eps_final[a] -= h;
    CHECK(g.d_eps_final[a] == doctest::Approx((loss_of(eu) - loss_of(ed)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("train_monotone keeps S_w non-decreasing and clamps at zero") {
  const QubitCount two(2);
  MonotoneSchedule m = MonotoneSchedule::uniform(two, 40, 2.5);
  m.zeta_final = {8e-4};
  TrainingConfig cfg;
  cfg.max_epochs = 20;
  bool monotone = true;
  const auto r = train_monotone(cfg, MonotoneRates{}, m, 1.5e-3, {2500.0, 100.0}, flat_state(two),
                                ghz_state(two), [&](const MonotoneSchedule& s, const LossReport&) {
                                  const Series nodes = s.sw_nodes();
                                  for (std::size_t k = 1; k < nodes.size(); ++k) {
                                    monotone = monotone && nodes[k] >= nodes[k - 1];
                                  }
                                });
  CHECK(monotone);
  CHECK(r.history.size() == 20);

  // A step far too large for every increment: the ones pushed below zero land exactly on it.
  cfg.max_epochs = 2;
  MonotoneRates rates;
  rates.eta_increments = 1e6;
  int zeros = 0;
  train_monotone(cfg, rates, m, 1.5e-3, {2500.0, 100.0}, flat_state(two), ghz_state(two),
                 [&](const MonotoneSchedule& s, const LossReport& rep) {
                   if (rep.epoch != 1) return;
                   for (double inc : s.increments) {
                     CHECK(inc >= 0.0);
                     zeros += inc == 0.0;
                   }
                 });
  CHECK(zeros > 0);
}

TEST_CASE("train_monotone with a converged start returns it unchanged") {
  const QubitCount two(2);
  MonotoneSchedule m = MonotoneSchedule::uniform(two, 5, 1.0);
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  rho.diagonal() << 0.25, 0.25, 0.25, 0.25;
  TrainingConfig cfg;
  cfg.max_epochs = 4;
  const auto r = train_monotone(cfg, MonotoneRates{}, m, 0.0, {0.0, 5.0}, rho, rho);
  CHECK(r.schedule.increments == m.increments);
  CHECK(r.schedule.zeta_final == m.zeta_final);
}

TEST_CASE("size bootstrap seed") {
  Rng rng(52);
  ScheduleSet two = rng.schedule(QubitCount(2), 10, 2.5, 1e-3);
  const ScheduleSet three = size_bootstrap_seed(two, QubitCount(3));
  REQUIRE(three.zeta.size() == 3);
  for (const auto& z : three.zeta) CHECK(z == two.zeta[0]);
  for (const auto& e : three.eps) CHECK(e == Series(10, 0.0));
  for (const auto& k : three.kk) CHECK(k == two.kk[0]);
  CHECK_THROWS_AS(size_bootstrap_seed(two, QubitCount(4)), ArgumentError);

  // With zero couplings the seed is the from-scratch schedule.
  const ScheduleSet scratch2 = standard_schedule(QubitCount(2), 10, 2.5, 1e-3);
  const ScheduleSet seeded = size_bootstrap_seed(scratch2, QubitCount(3));
  const ScheduleSet scratch3 = standard_schedule(QubitCount(3), 10, 2.5, 1e-3);
  CHECK(seeded.zeta == scratch3.zeta);
  CHECK(seeded.kk == scratch3.kk);

  const ScheduleSet four = size_bootstrap_seed(three, QubitCount(4));
  CHECK(four.zeta.size() == 6);
  for (const auto& z : four.zeta) {
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(z[k] == doctest::Approx(two.zeta[0][k]).epsilon(1e-15));
  }
}

TEST_CASE("gamma bootstrap starts from the previous schedule") {
  PathSpec path;
  path.family = PathFamily::Y;
  path.n = QubitCount(2);
  path.gamma_grid = {0.0, 0.5, 1.0};
  TrainingConfig cfg;
  cfg.max_epochs = 3;
  cfg.trainable = {true, true, false};
  cfg.eta_zeta = cfg.eta_eps = 1e-3;
  const ScheduleSet s0 = standard_schedule(QubitCount(2), 20, 2.5, 0.05);
  const auto results = bootstrap_gamma(path, cfg, s0, {10.0, 50.0}, flat_state(QubitCount(2)));
  REQUIRE(results.size() == 3);
  CHECK(results[0].training.history.front().rms < 1e-12);
  CHECK(results[2].spins.size() == 2);
  // gamma = 0.5 starts where gamma = 0 ended.
  const double start = evaluate_loss(results[0].training.schedule, {10.0, 50.0}, flat_state(QubitCount(2)),
                                     path_state(path, 0.5).density());
  CHECK(results[1].training.history.front().loss == start);
}
