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

#include "qanneal/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qanneal/errors.hpp"

namespace qanneal {

namespace {

std::string zeta_name(int a, int b) { return "zeta_" + std::to_string(a) + "_" + std::to_string(b); }

void check_series(const std::vector<Series>& family, std::size_t count, int timesteps,
                  const char* what) {
  if (family.size() != count) {
    throw ArgumentError(std::string("schedule: expected ") + std::to_string(count) + " " + what +
                        " series, got " + std::to_string(family.size()));
  }
  for (const auto& s : family) {
    if (s.size() != static_cast<std::size_t>(timesteps)) {
      throw ArgumentError(std::string("schedule: ") + what + " series has " +
                          std::to_string(s.size()) + " entries, expected " +
                          std::to_string(timesteps));
    }
  }
}

}  // namespace

ScheduleSet ScheduleSet::zeros(QubitCount n, int timesteps, double dt) {
  if (timesteps < 1) throw ArgumentError("schedule needs at least one timestep");
  if (!(dt > 0.0)) throw ArgumentError("schedule needs dt > 0");
  ScheduleSet s;
  s.n = n;
  s.timesteps = timesteps;
  s.dt = dt;
  const auto t = static_cast<std::size_t>(timesteps);
  s.zeta.assign(static_cast<std::size_t>(n.pairs()), Series(t, 0.0));
  s.eps.assign(static_cast<std::size_t>(n.value()), Series(t, 0.0));
  s.kk.assign(static_cast<std::size_t>(n.value()), Series(t, 0.0));
  return s;
}

void ScheduleSet::validate() const {
  if (timesteps < 1 || !(dt > 0.0)) throw ArgumentError("schedule: bad timesteps or dt");
  check_series(zeta, static_cast<std::size_t>(n.pairs()), timesteps, "zeta");
  check_series(eps, static_cast<std::size_t>(n.value()), timesteps, "eps");
  check_series(kk, static_cast<std::size_t>(n.value()), timesteps, "K");
}

int pair_index(int a, int b, QubitCount n) {
  if (a > b) std::swap(a, b);
  if (a < 0 || b >= n.value() || a == b) throw ArgumentError("pair_index: bad pair");
  // Row-major enumeration of (a, b), a < b.
  return a * n.value() - a * (a + 1) / 2 + (b - a - 1);
}

std::pair<int, int> pair_sites(int pair, QubitCount n) {
  int p = 0;
  for (int a = 0; a < n.value(); ++a) {
    for (int b = a + 1; b < n.value(); ++b, ++p) {
      if (p == pair) return {a, b};
    }
  }
  throw ArgumentError("pair_sites: pair index out of range");
}

Series default_tunneling_ramp(int timesteps, double k0, double ramp_end_fraction) {
  if (timesteps < 2) throw ArgumentError("tunneling ramp needs T >= 2");
  if (!(k0 > 0.0)) throw ArgumentError("tunneling ramp needs k0 > 0");
  if (!(ramp_end_fraction > 0.0 && ramp_end_fraction <= 1.0)) {
    throw ArgumentError("ramp_end_fraction must lie in (0, 1]");
  }
  const int end = std::max(1, static_cast<int>(std::floor(timesteps * ramp_end_fraction)));
  Series k(static_cast<std::size_t>(timesteps), 0.0);
  for (int i = 0; i < std::min(end, timesteps); ++i) {
    k[static_cast<std::size_t>(i)] = k0 * (1.0 - static_cast<double>(i) / end);
  }
  return k;
}

ScheduleSet standard_schedule(QubitCount n, int timesteps, double dt, double k0,
                              double ramp_end_fraction) {
  ScheduleSet s = ScheduleSet::zeros(n, timesteps, dt);
  const Series ramp = default_tunneling_ramp(timesteps, k0, ramp_end_fraction);
  for (auto& series : s.kk) series = ramp;
  return s;
}

double beta_at(const BetaRamp& ramp, double t) {
  // Allow a last-ulp overshoot from t = T * dt arithmetic.
  const double slack = 1e-9 * std::max(1.0, ramp.t_f);
  if (t < -slack || t > ramp.t_f + slack) {
    throw ArgumentError("beta_at: t = " + std::to_string(t) + " outside [0, t_f]");
  }
  if (ramp.t_f == 0.0) return ramp.beta_f;
  return ramp.beta_f * std::clamp(t, 0.0, ramp.t_f) / ramp.t_f;
}

ComplexMatrix assemble_hamiltonian(const ScheduleSet& s, int step) {
  if (step < 0 || step >= s.timesteps) {
    throw ArgumentError("assemble_hamiltonian: step " + std::to_string(step) + " out of range");
  }
  const auto k = static_cast<std::size_t>(step);
  const QubitCount n = s.n;
  const auto dim = static_cast<Eigen::Index>(n.dim());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  for (int a = 0; a < n.value(); ++a) diag += s.eps[static_cast<std::size_t>(a)][k] * z_diagonal(a, n);
  for (int p = 0; p < n.pairs(); ++p) {
    const auto [a, b] = pair_sites(p, n);
    diag += s.zeta[static_cast<std::size_t>(p)][k] * zz_diagonal(a, b, n);
  }
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  h.diagonal() = diag.cast<Complex>();
  for (int a = 0; a < n.value(); ++a) {
    const double amp = s.kk[static_cast<std::size_t>(a)][k];
    if (amp == 0.0) continue;
    const Eigen::Index mask = Eigen::Index{1} << (n.value() - 1 - a);
    for (Eigen::Index i = 0; i < dim; ++i) h(i ^ mask, i) += amp;
  }
  return h;
}

MonotoneSchedule MonotoneSchedule::uniform(QubitCount n, int timesteps, double dt) {
  if (timesteps < 1) throw ArgumentError("monotone schedule needs T >= 1");
  MonotoneSchedule m;
  m.n = n;
  m.dt = dt;
  m.increments.assign(static_cast<std::size_t>(timesteps), 1.0 / timesteps);
  m.zeta_final.assign(static_cast<std::size_t>(n.pairs()), 0.0);
  m.eps_final.assign(static_cast<std::size_t>(n.value()), 0.0);
  return m;
}

Series MonotoneSchedule::sw_nodes() const {
  Series nodes{s0};
  nodes.reserve(increments.size() + 1);
  for (double inc : increments) nodes.push_back(nodes.back() + inc);
  return nodes;
}

Series annealing_fraction(const MonotoneSchedule& m) {
  Series cumulative;
  cumulative.reserve(m.increments.size());
  double c = 0.0;
  for (double inc : m.increments) {
    if (inc < 0.0) throw ArgumentError("monotone schedule has a negative increment");
    c += inc;
    cumulative.push_back(c);
  }
  if (cumulative.empty() || !(c > 1e-12)) {
    throw DegenerateScheduleError("S_w range is degenerate (S_w(t_kf) - S_w(0) = " +
                                  std::to_string(c) + ")");
  }
  for (double& v : cumulative) v /= c;
  cumulative.back() = 1.0;
  return cumulative;
}

ScheduleSet expand_monotone(const MonotoneSchedule& m, double k0) {
  if (m.zeta_final.size() != static_cast<std::size_t>(m.n.pairs()) ||
      m.eps_final.size() != static_cast<std::size_t>(m.n.value())) {
    throw ArgumentError("monotone schedule endpoint vectors have the wrong size");
  }
  const Series f = annealing_fraction(m);
  ScheduleSet s = ScheduleSet::zeros(m.n, m.timesteps(), m.dt);
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t p = 0; p < s.zeta.size(); ++p) s.zeta[p][k] = f[k] * m.zeta_final[p];
    for (std::size_t a = 0; a < s.eps.size(); ++a) {
      s.eps[a][k] = f[k] * m.eps_final[a];
      s.kk[a][k] = (1.0 - f[k]) * k0;
    }
  }
  s.trainable = TrainableMask{true, true, true};
  return s;
}

std::vector<Series> lift_pair_schedule(const Series& zeta2, QubitCount n) {
  return std::vector<Series>(static_cast<std::size_t>(n.pairs()), zeta2);
}

void write_schedule(const ScheduleSet& s, const std::filesystem::path& csv_path,
                    const std::filesystem::path& json_path) {
  s.validate();
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << std::setprecision(17);
  csv << "step,time,param_name,value\n";
  for (int k = 0; k < s.timesteps; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double t = k * s.dt;
    for (int p = 0; p < s.n.pairs(); ++p) {
      const auto [a, b] = pair_sites(p, s.n);
      csv << k << ',' << t << ',' << zeta_name(a, b) << ',' << s.zeta[static_cast<std::size_t>(p)][i]
          << '\n';
    }
    for (int a = 0; a < s.n.value(); ++a) {
      csv << k << ',' << t << ",eps_" << a << ',' << s.eps[static_cast<std::size_t>(a)][i] << '\n';
    }
    for (int a = 0; a < s.n.value(); ++a) {
      csv << k << ',' << t << ",K_" << a << ',' << s.kk[static_cast<std::size_t>(a)][i] << '\n';
    }
  }
  if (!csv) throw IoError("write failed for " + csv_path.string());

  nlohmann::json meta = {
      {"n", s.n.value()},
      {"T", s.timesteps},
      {"dt", s.dt},
      {"trainable_mask", {{"zeta", s.trainable.zeta}, {"eps", s.trainable.eps}, {"kk", s.trainable.kk}}},
  };
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write " + json_path.string());
  js << std::setprecision(17) << meta.dump(2) << '\n';
  if (!js) throw IoError("write failed for " + json_path.string());
}

ScheduleSet read_schedule(const std::filesystem::path& csv_path,
                          const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot read " + json_path.string());
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed schedule metadata " + json_path.string() + ": " + e.what());
  }
  ScheduleSet s = ScheduleSet::zeros(QubitCount(meta.at("n").get<int>()), meta.at("T").get<int>(),
                                     meta.at("dt").get<double>());
  const auto& mask = meta.at("trainable_mask");
  s.trainable = TrainableMask{mask.at("zeta").get<bool>(), mask.at("eps").get<bool>(),
                              mask.at("kk").get<bool>()};

  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot read " + csv_path.string());
  std::string line;
  std::getline(csv, line);
  if (line.rfind("step,time,param_name,value", 0) != 0) {
    throw IoError("unexpected schedule CSV header in " + csv_path.string());
  }
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string step_s, time_s, name, value_s;
    std::getline(row, step_s, ',');
    std::getline(row, time_s, ',');
    std::getline(row, name, ',');
    std::getline(row, value_s, ',');
    const int step = std::stoi(step_s);
    const double value = std::strtod(value_s.c_str(), nullptr);
    if (step < 0 || step >= s.timesteps) throw IoError("schedule CSV step out of range: " + line);
    const auto k = static_cast<std::size_t>(step);
    int a = -1;
    int b = -1;
    if (std::sscanf(name.c_str(), "zeta_%d_%d", &a, &b) == 2) {
      s.zeta[static_cast<std::size_t>(pair_index(a, b, s.n))][k] = value;
    } else if (std::sscanf(name.c_str(), "eps_%d", &a) == 1 && a >= 0 && a < s.n.value()) {
      s.eps[static_cast<std::size_t>(a)][k] = value;
    } else if (std::sscanf(name.c_str(), "K_%d", &a) == 1 && a >= 0 && a < s.n.value()) {
      s.kk[static_cast<std::size_t>(a)][k] = value;
    } else {
      throw IoError("unknown schedule parameter '" + name + "'");
    }
    ++rows;
  }
  const std::size_t expected =
      static_cast<std::size_t>(s.timesteps) * static_cast<std::size_t>(s.n.pairs() + 2 * s.n.value());
  if (rows != expected) {
    throw IoError("schedule CSV has " + std::to_string(rows) + " rows, expected " +
                  std::to_string(expected));
  }
  return s;
}

}  // namespace qanneal
