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

#include "qanneal/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

#include "qanneal/errors.hpp"

namespace qanneal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::AnnealTrain, "anneal-train"},  {ExperimentKind::SizeBootstrap, "size-bootstrap"},
    {ExperimentKind::BrokenPath, "broken-path"},    {ExperimentKind::NoiseMc, "noise-mc"},
    {ExperimentKind::Monotone, "monotone"},
};

int default_epochs(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BrokenPath: return 50;
    case ExperimentKind::Monotone: return 1000;
    default: return 200;
  }
}

// Reads optional fields from one JSON object, recording every problem instead of throwing.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string prefix, std::vector<std::string>& bad)
      : obj_(obj), prefix_(std::move(prefix)), bad_(bad) {
    if (!obj_.is_object()) bad_.push_back(where("") + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      bad_.push_back(where(key) + " has the wrong type");
    }
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

  const json* child(const char* key) {
    seen_.push_back(key);
    return has(key) ? &obj_.at(key) : nullptr;
  }

  void reject_unknown() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        bad_.push_back("unknown field " + where(key.c_str()));
      }
    }
  }

 private:
  std::string where(const char* key) const {
    if (prefix_.empty()) return key;
    return *key ? prefix_ + "." + key : prefix_;
  }

  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& bad_;
  std::vector<std::string> seen_;
};

InitPolicy parse_policy(const std::string& name, std::vector<std::string>& bad) {
  if (name == "zeros") return InitPolicy::Zeros;
  if (name == "seed-schedule") return InitPolicy::SeedSchedule;
  bad.push_back("training.init_policy must be zeros or seed-schedule, got " + name);
  return InitPolicy::Zeros;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string gamma_dir(double gamma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gamma_%.4f", gamma);
  return buf;
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".qanneal-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "probe")) {
      throw IoError("output directory " + dir.string() + " is not writable");
    }
  }
  fs::remove(probe, ec);
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

json history_summary(const std::vector<LossReport>& history) {
  return {{"epochs", history.size()},
          {"initial_rms", history.front().rms},
          {"final_rms", history.back().rms},
          {"final_loss", history.back().loss}};
}

// errors.csv, schedule.csv/.json, rho_series.csv and per-step spins.csv for one run.
void write_run_outputs(const fs::path& dir, const std::vector<LossReport>& history,
                       const ScheduleSet& schedule, const ComplexMatrix& rho0,
                       const BetaRamp& ramp, int rho_stride) {
  write_errors(history, dir / "errors.csv");
  write_schedule(schedule, dir / "schedule.csv", dir / "schedule.json");
  const Trajectory traj = run_forward(rho0, schedule, ramp);
  write_rho_series(traj, dir / "rho_series.csv", rho_stride);
  write_step_spins(traj, dir / "spins.csv", rho_stride);
}

json manifest_for(const ExperimentConfig& cfg, double wall_seconds, json summary) {
  json m = {{"version", kVersion},
            {"kind", to_string(cfg.kind)},
            {"config", config_to_json(cfg)},
            {"rng", kRngName},
            {"wall_time_s", wall_seconds},
            {"summary", std::move(summary)}};
  if (cfg.kind == ExperimentKind::NoiseMc) {
    m["noise_mode"] = kNoiseMode;
    m["noise_magnitude"] = "relative-frobenius";
  }
  return m;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ComplexMatrix initial_density(const ExperimentConfig& cfg, QubitCount n) {
  if (cfg.initial_state == "path_start") {
    if (!cfg.path_family) throw ConfigError({"initial_state path_start needs path.family"});
    PathSpec spec{parse_family(*cfg.path_family), n, cfg.gamma_grid};
    return path_state(spec, cfg.gamma_grid.front()).density();
  }
  return named_state(cfg.initial_state, n);
}

json run_anneal(const ExperimentConfig& cfg, const EpochCallback& progress) {
  const QubitCount n(cfg.n);
  const ComplexMatrix rho0 = initial_density(cfg, n);
  const TrainResult r = train(cfg.training, initial_schedule(cfg, n), cfg.ramp, rho0,
                              named_state(cfg.target, n), progress);
  write_run_outputs(cfg.output_dir, r.history, r.schedule, rho0, cfg.ramp, cfg.rho_stride);
  return history_summary(r.history);
}

json run_size_bootstrap(const ExperimentConfig& cfg, const EpochCallback& progress) {
  json levels = json::array();
  Stopwatch clock;
  std::optional<ScheduleSet> previous;
  for (int size = cfg.n; size <= cfg.max_qubits; ++size) {
    const QubitCount n(size);
    const fs::path dir = cfg.output_dir / ("n" + std::to_string(size));
    prepare_output_dir(dir);
    const ComplexMatrix rho0 = flat_state(n);
    const ComplexMatrix target = ghz_state(n);
    // The zero-seeded starting error is what the seeded run is compared against.
    const double scratch_rms =
        loss(run_forward(rho0, standard_schedule(n, cfg.timesteps(), cfg.dt, cfg.k0, cfg.ramp_end_fraction),
                         cfg.ramp),
             target)
            .rms;
    TrainResult r = previous ? bootstrap_size(*previous, n, cfg.training, cfg.ramp, progress)
                             : train(cfg.training, initial_schedule(cfg, n), cfg.ramp, rho0, target, progress);
    write_run_outputs(dir, r.history, r.schedule, rho0, cfg.ramp, cfg.rho_stride);
    json level = history_summary(r.history);
    level["n"] = size;
    level["seeded"] = previous.has_value();
    level["scratch_initial_rms"] = scratch_rms;
    ExperimentConfig level_cfg = cfg;
    level_cfg.n = size;
    level_cfg.max_qubits = size;
    level_cfg.output_dir = dir;
    if (previous) level_cfg.seed_schedule_file = cfg.output_dir / ("n" + std::to_string(size - 1)) / "schedule.csv";
    write_json(manifest_for(level_cfg, clock.seconds(), level), dir / "manifest.json");
    levels.push_back(std::move(level));
    previous = std::move(r.schedule);
  }
  return {{"levels", levels}};
}

json run_broken_path(const ExperimentConfig& cfg, const EpochCallback& progress) {
  const QubitCount n(cfg.n);
  const PathSpec spec{parse_family(*cfg.path_family), n, cfg.gamma_grid};
  const ComplexMatrix rho0 = initial_density(cfg, n);
  std::function<void(double, const LossReport&)> cb;
  if (progress) cb = [&progress](double, const LossReport& r) { progress(r); };
  const auto results = bootstrap_gamma(spec, cfg.training, initial_schedule(cfg, n), cfg.ramp, rho0, cb);
  json per_gamma = json::array();
  for (const auto& g : results) {
    const fs::path dir = cfg.output_dir / gamma_dir(g.gamma);
    prepare_output_dir(dir);
    write_run_outputs(dir, g.training.history, g.training.schedule, rho0, cfg.ramp, cfg.rho_stride);
    json entry = history_summary(g.training.history);
    entry["gamma"] = g.gamma;
    entry["spins"] = g.spins;
    entry["oracle_spins"] = spin_averages(path_state(spec, g.gamma).density());
    per_gamma.push_back(std::move(entry));
  }
  spin_curve(results, cfg.output_dir / "spins.csv");
  return {{"family", *cfg.path_family}, {"gammas", per_gamma}};
}

json run_noise(const ExperimentConfig& cfg, const EpochCallback& progress) {
  const QubitCount n(cfg.n);
  const ComplexMatrix target = named_state(cfg.target, n);
  json summary;
  ScheduleSet trained;
  if (cfg.seed_schedule_file) {
    trained = initial_schedule(cfg, n);
  } else {
    const fs::path dir = cfg.output_dir / "trained";
    prepare_output_dir(dir);
    const TrainResult r = train(cfg.training, initial_schedule(cfg, n), cfg.ramp, flat_state(n), target, progress);
    write_run_outputs(dir, r.history, r.schedule, flat_state(n), cfg.ramp, cfg.rho_stride);
    summary["training"] = history_summary(r.history);
    trained = r.schedule;
  }
  const NoiseReport report = noise_mc(cfg.noise, trained, cfg.ramp, target, cfg.rng_seed);

  const fs::path samples_csv = cfg.output_dir / "noise_samples.csv";
  auto out = open_csv(samples_csv, "sample,nominal,magnitude,rms");
  for (const auto& s : report.samples) {
    out << s.index << ',' << fmt17(s.nominal) << ',' << fmt17(s.magnitude) << ',' << fmt17(s.rms) << '\n';
  }
  close_checked(out, samples_csv);
  const fs::path summary_csv = cfg.output_dir / "noise_summary.csv";
  auto sum = open_csv(summary_csv, "nominal,count,mean_magnitude,max_rms,mean_rms");
  for (const auto& m : report.summary) {
    sum << fmt17(m.nominal) << ',' << m.count << ',' << fmt17(m.mean_magnitude) << ','
        << fmt17(m.max_rms) << ',' << fmt17(m.mean_rms) << '\n';
  }
  close_checked(sum, summary_csv);

  summary["samples"] = report.samples.size();
  summary["excluded"] = report.excluded;
  summary["reference_rms"] = report.reference_rms;
  summary["slope"] = report.slope;
  summary["intercept"] = report.intercept;
  return summary;
}

json run_monotone(const ExperimentConfig& cfg, const EpochCallback& progress) {
  const QubitCount n(cfg.n);
  MonotoneSchedule m0 = MonotoneSchedule::uniform(n, cfg.timesteps(), cfg.dt);
  std::fill(m0.zeta_final.begin(), m0.zeta_final.end(), cfg.monotone.zeta_final_init);
  std::fill(m0.eps_final.begin(), m0.eps_final.end(), cfg.monotone.eps_final_init);
  const ComplexMatrix rho0 = initial_density(cfg, n);
  MonotoneCallback cb;
  if (progress) cb = [&progress](const MonotoneSchedule&, const LossReport& r) { progress(r); };
  const MonotoneTrainResult r = train_monotone(cfg.training, cfg.monotone.rates, m0, cfg.k0, cfg.ramp, rho0,
                                               named_state(cfg.target, n), cb);
  write_run_outputs(cfg.output_dir, r.history, expand_monotone(r.schedule, cfg.k0), rho0, cfg.ramp,
                    cfg.rho_stride);
  const fs::path sw_csv = cfg.output_dir / "sw.csv";
  auto out = open_csv(sw_csv, "node,time,s_w");
  const Series nodes = r.schedule.sw_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    out << k << ',' << fmt17(static_cast<double>(k) * cfg.dt) << ',' << fmt17(nodes[k]) << '\n';
  }
  close_checked(out, sw_csv);
  json summary = history_summary(r.history);
  summary["zeta_final"] = r.schedule.zeta_final;
  summary["eps_final"] = r.schedule.eps_final;
  return summary;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw ArgumentError("unknown experiment kind: " + name);
}

std::vector<double> NoiseSpec::default_magnitudes() {
  std::vector<double> m;
  for (int i = 1; i <= 20; ++i) m.push_back(0.01 * i);
  return m;
}

int ExperimentConfig::timesteps() const {
  if (!(dt > 0.0)) return 0;
  return static_cast<int>(std::lround(ramp.t_f / dt));
}

void ExperimentConfig::validate() const {
  std::vector<std::string> bad;
  if (n < 1 || n > kMaxQubits) bad.push_back("n must be in [1, " + std::to_string(kMaxQubits) + "]");
  if (!(dt > 0.0)) bad.push_back("dt must be > 0");
  if (!(ramp.t_f > 0.0)) bad.push_back("ramp.t_f must be > 0");
  if (dt > 0.0 && ramp.t_f > 0.0) {
    const int t = timesteps();
    if (t < 1 || std::abs(t * dt - ramp.t_f) > 1e-9 * ramp.t_f) {
      bad.push_back("ramp.t_f must be a positive multiple of dt");
    }
  }
  if (!(ramp.beta_f >= 0.0)) bad.push_back("ramp.beta_f must be >= 0");
  if (!(k0 >= 0.0)) bad.push_back("k0 must be >= 0");
  if (!(ramp_end_fraction > 0.0 && ramp_end_fraction <= 1.0)) {
    bad.push_back("ramp_end_fraction must be in (0, 1]");
  }
  if (rho_stride < 1) bad.push_back("rho_stride must be >= 1");
  if (output_dir.empty()) bad.push_back("output_dir is required");
  try {
    training.validate();
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) bad.push_back("training: " + v);
  }
  if (training.init_policy == InitPolicy::SeedSchedule && !seed_schedule_file) {
    bad.push_back("init_policy seed-schedule needs seed_schedule_file");
  }
  auto check_state = [&](const std::string& name, const char* field) {
    if (name == "path_start" && std::string(field) == "initial_state") {
      if (!path_family) bad.push_back("initial_state path_start needs path.family");
      return;
    }
    if (n < 1 || n > kMaxQubits) return;
    try {
      named_state(name, QubitCount(n));
    } catch (const std::exception& e) {
      bad.push_back(std::string(field) + ": " + e.what());
    }
  };
  check_state(target, "target");
  check_state(initial_state, "initial_state");
  if (path_family) {
    try {
      const PathSpec spec{parse_family(*path_family), QubitCount(std::clamp(n, 1, kMaxQubits)), gamma_grid};
      spec.validate();
    } catch (const std::exception& e) {
      bad.push_back(std::string("path: ") + e.what());
    }
  }
  switch (kind) {
    case ExperimentKind::BrokenPath:
      if (!path_family) bad.push_back("broken-path needs path.family");
      break;
    case ExperimentKind::SizeBootstrap:
      if (n < 2) bad.push_back("size-bootstrap needs n >= 2");
      if (max_qubits < n || max_qubits > kMaxQubits) {
        bad.push_back("max_qubits must be in [n, " + std::to_string(kMaxQubits) + "]");
      }
      break;
    case ExperimentKind::NoiseMc:
      if (noise.samples < 1) bad.push_back("noise.samples must be >= 1");
      if (noise.magnitudes.empty()) bad.push_back("noise.magnitudes must not be empty");
      for (double m : noise.magnitudes) {
        if (!(m > 0.0)) {
          bad.push_back("noise.magnitudes must all be > 0");
          break;
        }
      }
      if (noise.workers < 0) bad.push_back("noise.workers must be >= 0");
      break;
    case ExperimentKind::Monotone:
      if (!(monotone.rates.eta_increments > 0.0)) bad.push_back("monotone.eta_increments must be > 0");
      if (!(monotone.rates.eta_zeta_final >= 0.0)) bad.push_back("monotone.eta_zeta_final must be >= 0");
      if (!(monotone.rates.eta_eps_final >= 0.0)) bad.push_back("monotone.eta_eps_final must be >= 0");
      if (n < 2) bad.push_back("monotone needs n >= 2");
      break;
    case ExperimentKind::AnnealTrain:
      break;
  }
  if (!bad.empty()) throw ConfigError(bad);
}

ExperimentConfig config_from_json(const json& j) {
  std::vector<std::string> bad;
  ExperimentConfig cfg;
  FieldReader top(j, "", bad);

  std::string kind = to_string(cfg.kind);
  top.get("kind", kind);
  try {
    cfg.kind = parse_kind(kind);
  } catch (const ArgumentError& e) {
    bad.push_back(e.what());
  }
  const bool broken = cfg.kind == ExperimentKind::BrokenPath;
  cfg.training.max_epochs = default_epochs(cfg.kind);
  if (broken) {
    cfg.training.trainable.eps = true;
    cfg.initial_state = "path_start";
  }

  top.get("n", cfg.n);
  top.get("dt", cfg.dt);
  top.get("k0", cfg.k0);
  top.get("ramp_end_fraction", cfg.ramp_end_fraction);
  top.get("rng_seed", cfg.rng_seed);
  top.get("target", cfg.target);
  top.get("initial_state", cfg.initial_state);
  top.get("max_qubits", cfg.max_qubits);
  top.get("rho_stride", cfg.rho_stride);
  std::string out_dir, seed_file;
  top.get("output_dir", out_dir);
  cfg.output_dir = out_dir;
  if (top.has("seed_schedule_file")) {
    top.get("seed_schedule_file", seed_file);
    cfg.seed_schedule_file = seed_file;
  }

  if (const json* p = top.child("path")) {
    FieldReader r(*p, "path", bad);
    std::string family;
    r.get("family", family);
    if (!family.empty()) cfg.path_family = family;
    r.get("gamma_grid", cfg.gamma_grid);
    r.reject_unknown();
  }
  if (const json* t = top.child("training")) {
    FieldReader r(*t, "training", bad);
    r.get("eta_zeta", cfg.training.eta_zeta);
    r.get("eta_eps", cfg.training.eta_eps);
    r.get("eta_kk", cfg.training.eta_kk);
    r.get("eta_terminal", cfg.training.eta_terminal);
    r.get("max_epochs", cfg.training.max_epochs);
    r.get("stop_rms", cfg.training.stop_rms);
    std::string policy = "zeros";
    r.get("init_policy", policy);
    cfg.training.init_policy = parse_policy(policy, bad);
    if (const json* m = r.child("trainable")) {
      FieldReader mr(*m, "training.trainable", bad);
      mr.get("zeta", cfg.training.trainable.zeta);
      mr.get("eps", cfg.training.trainable.eps);
      mr.get("kk", cfg.training.trainable.kk);
      mr.reject_unknown();
    }
    r.reject_unknown();
  }
  if (const json* rp = top.child("ramp")) {
    FieldReader r(*rp, "ramp", bad);
    r.get("beta_f", cfg.ramp.beta_f);
    r.get("t_f", cfg.ramp.t_f);
    r.reject_unknown();
  }
  if (const json* nz = top.child("noise")) {
    FieldReader r(*nz, "noise", bad);
    r.get("samples", cfg.noise.samples);
    r.get("magnitudes", cfg.noise.magnitudes);
    r.get("workers", cfg.noise.workers);
    std::string mode = kNoiseMode;
    r.get("mode", mode);
    if (mode != kNoiseMode) bad.push_back(std::string("noise.mode must be ") + kNoiseMode);
    r.reject_unknown();
  }
  if (const json* mo = top.child("monotone")) {
    FieldReader r(*mo, "monotone", bad);
    r.get("eta_increments", cfg.monotone.rates.eta_increments);
    r.get("eta_zeta_final", cfg.monotone.rates.eta_zeta_final);
    r.get("eta_eps_final", cfg.monotone.rates.eta_eps_final);
    r.get("zeta_final_init", cfg.monotone.zeta_final_init);
    r.get("eps_final_init", cfg.monotone.eps_final_init);
    r.reject_unknown();
  }
  top.reject_unknown();
  if (!bad.empty()) throw ConfigError(bad);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j = {
      {"kind", to_string(cfg.kind)},
      {"n", cfg.n},
      {"training",
       {{"eta_zeta", cfg.training.eta_zeta},
        {"eta_eps", cfg.training.eta_eps},
        {"eta_kk", cfg.training.eta_kk},
        {"eta_terminal", cfg.training.eta_terminal},
        {"max_epochs", cfg.training.max_epochs},
        {"stop_rms", cfg.training.stop_rms},
        {"init_policy", cfg.training.init_policy == InitPolicy::Zeros ? "zeros" : "seed-schedule"},
        {"trainable",
         {{"zeta", cfg.training.trainable.zeta},
          {"eps", cfg.training.trainable.eps},
          {"kk", cfg.training.trainable.kk}}}}},
      {"ramp", {{"beta_f", cfg.ramp.beta_f}, {"t_f", cfg.ramp.t_f}}},
      {"dt", cfg.dt},
      {"k0", cfg.k0},
      {"ramp_end_fraction", cfg.ramp_end_fraction},
      {"rng_seed", cfg.rng_seed},
      {"output_dir", cfg.output_dir.string()},
      {"noise", {{"samples", cfg.noise.samples}, {"magnitudes", cfg.noise.magnitudes},
                 {"workers", cfg.noise.workers}, {"mode", kNoiseMode}}},
      {"monotone",
       {{"eta_increments", cfg.monotone.rates.eta_increments},
        {"eta_zeta_final", cfg.monotone.rates.eta_zeta_final},
        {"eta_eps_final", cfg.monotone.rates.eta_eps_final},
        {"zeta_final_init", cfg.monotone.zeta_final_init},
        {"eps_final_init", cfg.monotone.eps_final_init}}},
      {"target", cfg.target},
      {"initial_state", cfg.initial_state},
      {"max_qubits", cfg.max_qubits},
      {"rho_stride", cfg.rho_stride},
  };
  if (cfg.path_family) j["path"] = {{"family", *cfg.path_family}, {"gamma_grid", cfg.gamma_grid}};
  if (cfg.seed_schedule_file) j["seed_schedule_file"] = cfg.seed_schedule_file->string();
  return j;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError({"config " + file.string() + " is not valid JSON: " + e.what()});
  }
  return config_from_json(j);
}

ComplexMatrix named_state(const std::string& name, QubitCount n) {
  if (name == "flat") return flat_state(n);
  if (name == "ghz") return ghz_state(n);
  if (name == "w") return w_state(n);
  const auto at = name.find('@');
  if (at == std::string::npos) throw ArgumentError("unknown state name: " + name);
  PathSpec spec;
  spec.family = parse_family(name.substr(0, at));
  spec.n = n;
  spec.validate();
  double gamma = 0.0;
  try {
    std::size_t used = 0;
    gamma = std::stod(name.substr(at + 1), &used);
    if (used != name.size() - at - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ArgumentError("bad gamma in state name: " + name);
  }
  return path_state(spec, gamma).density();
}

ScheduleSet initial_schedule(const ExperimentConfig& cfg, QubitCount n) {
  ScheduleSet s;
  if (cfg.seed_schedule_file) {
    fs::path csv = *cfg.seed_schedule_file;
    fs::path sidecar = csv;
    sidecar.replace_extension(".json");
    s = read_schedule(csv, sidecar);
    if (!(s.n == n) || s.timesteps != cfg.timesteps() || std::abs(s.dt - cfg.dt) > 1e-12 * cfg.dt) {
      throw ConfigError({"seed schedule " + csv.string() + " does not match n, T and dt of the config"});
    }
  } else {
    s = standard_schedule(n, cfg.timesteps(), cfg.dt, cfg.k0, cfg.ramp_end_fraction);
  }
  s.trainable = cfg.training.trainable;
  return s;
}

double NoiseSource::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  constexpr double kScale = 0x1.0p-53;
  const double u1 = 1.0 - static_cast<double>(engine_() >> 11) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Complex NoiseSource::complex_normal() {
  const double re = normal();
  const double im = normal();
  return Complex{re, im} * std::sqrt(0.5);
}

PerturbedState perturb_flat(QubitCount n, double magnitude, NoiseSource& rng) {
  if (!(magnitude >= 0.0)) throw ArgumentError("perturb_flat: magnitude must be >= 0");
  const ComplexMatrix flat = flat_state(n);
  if (magnitude == 0.0) return {flat, 0.0};
  const auto d = static_cast<Eigen::Index>(n.dim());
  const double sigma = magnitude * flat.norm() / static_cast<double>(d);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ComplexMatrix m = flat;
    for (Eigen::Index c = 0; c < d; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) m(r, c) += sigma * rng.complex_normal();
    }
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) continue;
    h /= tr;
    return {h, (h - flat).norm() / flat.norm()};
  }
  throw ContractError("perturb_flat: no sample with positive trace in 1000 draws");
}

NoiseReport noise_mc(const NoiseSpec& spec, const ScheduleSet& trained, const BetaRamp& ramp,
                     const ComplexMatrix& rho_des, std::uint64_t rng_seed) {
  if (spec.samples < 1 || spec.magnitudes.empty()) throw ArgumentError("noise_mc: empty noise spec");
  const QubitCount n = trained.n;
  NoiseReport report;
  report.reference_rms = loss(run_forward(flat_state(n), trained, ramp), rho_des).rms;

  struct Slot {
    NoiseSample sample;
    bool ok = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(spec.samples));
  const auto seed_lo = static_cast<std::uint32_t>(rng_seed);
  const auto seed_hi = static_cast<std::uint32_t>(rng_seed >> 32);
  auto run_one = [&](int i) {
    std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(i)};
    NoiseSource rng(seq);
    const double nominal = spec.magnitudes[static_cast<std::size_t>(i) % spec.magnitudes.size()];
    const PerturbedState p = perturb_flat(n, nominal, rng);
    Slot& slot = slots[static_cast<std::size_t>(i)];
    slot.sample = {i, nominal, p.magnitude, 0.0};
    try {
      slot.sample.rms = loss(run_forward(p.rho, trained, ramp), rho_des).rms;
      slot.ok = std::isfinite(slot.sample.rms);
    } catch (const OverflowError&) {
      slot.ok = false;
    }
  };
  int workers = spec.workers > 0 ? spec.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, spec.samples);
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < spec.samples; i += workers) run_one(i);
    }));
  }
  for (auto& j : jobs) j.get();

  for (const Slot& s : slots) {
    if (s.ok) {
      report.samples.push_back(s.sample);
    } else {
      ++report.excluded;
    }
  }

  std::vector<double> nominals = spec.magnitudes;
  std::sort(nominals.begin(), nominals.end());
  nominals.erase(std::unique(nominals.begin(), nominals.end()), nominals.end());
  for (double nominal : nominals) {
    MagnitudeSummary m;
    m.nominal = nominal;
    for (const auto& s : report.samples) {
      if (s.nominal != nominal) continue;
      ++m.count;
      m.mean_magnitude += s.magnitude;
      m.mean_rms += s.rms;
      m.max_rms = std::max(m.max_rms, s.rms);
    }
    if (m.count == 0) continue;
    m.mean_magnitude /= m.count;
    m.mean_rms /= m.count;
    report.summary.push_back(m);
  }

  if (report.summary.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(report.summary.size());
    for (const auto& m : report.summary) {
      sx += m.mean_magnitude;
      sy += m.max_rms;
      sxx += m.mean_magnitude * m.mean_magnitude;
      sxy += m.mean_magnitude * m.max_rms;
    }
    const double denom = k * sxx - sx * sx;
    if (denom > 0.0) {
      report.slope = (k * sxy - sx * sy) / denom;
      report.intercept = (sy - report.slope * sx) / k;
    }
  }
  return report;
}

void spin_curve(const std::vector<GammaResult>& results, const fs::path& csv) {
  auto out = open_csv(csv, "gamma,qubit,mean_spin");
  for (const auto& g : results) {
    for (std::size_t q = 0; q < g.spins.size(); ++q) {
      out << fmt17(g.gamma) << ',' << q << ',' << fmt17(g.spins[q]) << '\n';
    }
  }
  close_checked(out, csv);
}

void write_errors(const std::vector<LossReport>& history, const fs::path& csv) {
  auto out = open_csv(csv, "epoch,rms,loss");
  for (const auto& r : history) out << r.epoch << ',' << fmt17(r.rms) << ',' << fmt17(r.loss) << '\n';
  close_checked(out, csv);
}

RunSummary run_experiment(const ExperimentConfig& cfg, const EpochCallback& progress) {
  cfg.validate();
  prepare_output_dir(cfg.output_dir);
  Stopwatch clock;
  json summary;
  switch (cfg.kind) {
    case ExperimentKind::AnnealTrain: summary = run_anneal(cfg, progress); break;
    case ExperimentKind::SizeBootstrap: summary = run_size_bootstrap(cfg, progress); break;
    case ExperimentKind::BrokenPath: summary = run_broken_path(cfg, progress); break;
    case ExperimentKind::NoiseMc: summary = run_noise(cfg, progress); break;
    case ExperimentKind::Monotone: summary = run_monotone(cfg, progress); break;
  }
  RunSummary run{cfg.output_dir, manifest_for(cfg, clock.seconds(), std::move(summary))};
  write_json(run.manifest, cfg.output_dir / "manifest.json");
  return run;
}

std::string render_report(const fs::path& root) {
  std::error_code ec;
  if (!fs::exists(root, ec)) throw IoError("no such directory: " + root.string());
  std::vector<fs::path> manifests;
  if (fs::is_regular_file(root / "manifest.json")) manifests.push_back(root / "manifest.json");
  for (fs::recursive_directory_iterator it(root, ec), end; it != end; it.increment(ec)) {
    if (ec) throw IoError("cannot scan " + root.string() + ": " + ec.message());
    if (it->path().filename() == "manifest.json" && it->path() != root / "manifest.json") {
      manifests.push_back(it->path());
    }
  }
  if (ec) throw IoError("cannot scan " + root.string() + ": " + ec.message());
  std::sort(manifests.begin() + (manifests.empty() ? 0 : 1), manifests.end());

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-40s %-15s %3s %7s %14s %10s\n", "run", "kind", "n", "epochs",
                "final_rms", "wall_s");
  out << line;
  for (const auto& path : manifests) {
    std::ifstream in(path);
    json m;
    try {
      in >> m;
    } catch (const json::exception&) {
      throw IoError("unreadable manifest " + path.string());
    }
    const json& s = m.value("summary", json::object());
    const json& c = m.value("config", json::object());
    std::string epochs = "-", rms = "-";
    if (s.contains("epochs")) epochs = std::to_string(s["epochs"].get<int>());
    if (s.contains("final_rms")) {
      std::snprintf(line, sizeof line, "%.6g", s["final_rms"].get<double>());
      rms = line;
    } else if (s.contains("slope")) {
      std::snprintf(line, sizeof line, "slope %.4g", s["slope"].get<double>());
      rms = line;
    }
    const std::string rel = fs::relative(path.parent_path(), root, ec).string();
    std::snprintf(line, sizeof line, "%-40s %-15s %3d %7s %14s %10.2f\n", rel.empty() ? "." : rel.c_str(),
                  m.value("kind", "?").c_str(), c.value("n", 0), epochs.c_str(), rms.c_str(),
                  m.value("wall_time_s", 0.0));
    out << line;
  }
  return out.str();
}

}  // namespace qanneal
