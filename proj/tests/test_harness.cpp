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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qanneal/errors.hpp"
#include "qanneal/harness.hpp"

using namespace qanneal;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qanneal_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_config(const std::string& kind, const fs::path& out) {
  return {{"kind", kind},
          {"n", 2},
          {"dt", 2.5},
          {"k0", 0.05},
          {"ramp", {{"beta_f", 10.0}, {"t_f", 50.0}}},
          {"training", {{"max_epochs", 4}, {"eta_zeta", 1e-3}, {"eta_eps", 1e-3}}},
          {"rho_stride", 5},
          {"output_dir", out.string()}};
}

}  // namespace

TEST_CASE("config defaults follow the kind") {
  const ExperimentConfig a = config_from_json({{"kind", "anneal-train"}, {"output_dir", "x"}});
  CHECK(a.training.max_epochs == 200);
  CHECK(a.timesteps() == 2000);
  CHECK(a.ramp.beta_f == 2500.0);
  CHECK(a.training.eta_zeta == 1.25e-5);
  CHECK_FALSE(a.training.trainable.eps);
  const ExperimentConfig b = config_from_json({{"kind", "broken-path"}, {"path", {{"family", "Y"}}}, {"output_dir", "x"}});
  CHECK(b.training.max_epochs == 50);
  CHECK(b.training.trainable.eps);
  CHECK(b.initial_state == "path_start");
  CHECK_NOTHROW(b.validate());
  CHECK(config_from_json({{"kind", "monotone"}}).training.max_epochs == 1000);
}

TEST_CASE("config errors list every violation") {
  const json bad = {{"kind", "anneal-train"},
                    {"n", 12},
                    {"dt", -1.0},
                    {"training", {{"max_epochs", 0}, {"bogus", 1}}},
                    {"unknown_top", true}};
  try {
    config_from_json(bad).validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    // parse-time problems are reported first
    CHECK(e.violations().size() == 2);
  }
  const ExperimentConfig cfg = config_from_json({{"n", 12}, {"dt", -1.0}, {"training", {{"max_epochs", 0}}}});
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() >= 4);  // n, dt, output_dir, max_epochs
  }
  CHECK_THROWS_AS(config_from_json({{"kind", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"n", "two"}}), ConfigError);
  ExperimentConfig path = config_from_json({{"kind", "broken-path"}, {"output_dir", "x"}});
  CHECK_THROWS_AS(path.validate(), ConfigError);
  path.path_family = "X";
  CHECK_THROWS_AS(path.validate(), ConfigError);  // X needs three qubits
}

TEST_CASE("config survives a JSON round trip") {
  ExperimentConfig cfg = config_from_json(small_config("noise-mc", "out"));
  cfg.noise.samples = 17;
  cfg.rng_seed = 99;
  cfg.path_family = "Yp";
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
}

TEST_CASE("named states") {
  const QubitCount two(2);
  CHECK(named_state("flat", two) == flat_state(two));
  CHECK(named_state("ghz", two) == ghz_state(two));
  CHECK(named_state("w", two) == w_state(two));
  CHECK(named_state("Y@1", two) == path_state({PathFamily::Y, two}, 1.0).density());
  CHECK_THROWS_AS(named_state("bell", two), ArgumentError);
  CHECK_THROWS_AS(named_state("Y@x", two), ArgumentError);
  CHECK_THROWS_AS(named_state("X@0.5", two), ArgumentError);
}

TEST_CASE("perturb_flat") {
  const QubitCount two(2);
  std::seed_seq seq{1u, 2u};
  NoiseSource rng(seq);
  const PerturbedState zero = perturb_flat(two, 0.0, rng);
  CHECK(zero.rho == flat_state(two));
  CHECK(zero.magnitude == 0.0);
  for (int i = 0; i < 200; ++i) {
    const PerturbedState p = perturb_flat(two, 0.2, rng);
    CHECK(std::abs(p.rho.trace() - 1.0) < 1e-12);
    CHECK(hermiticity_defect(p.rho) < 1e-14);
    CHECK(p.magnitude > 0.0);
    CHECK(p.magnitude < 0.6);
  }
  CHECK_THROWS_AS(perturb_flat(two, -0.1, rng), ArgumentError);
}

TEST_CASE("noise source is reproducible and standard normal") {
  std::seed_seq a{7u}, b{7u};
  NoiseSource x(a), y(b);
  double sum = 0.0, sq = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double v = x.normal();
    CHECK(v == y.normal());
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / count) < 0.03);
  CHECK(std::abs(sq / count - 1.0) < 0.05);
}

TEST_CASE("noise_mc accounting and reference sample") {
  const QubitCount two(2);
  const ScheduleSet s = standard_schedule(two, 10, 2.5, 0.05);
  const BetaRamp ramp{10.0, 25.0};
  NoiseSpec spec;
  spec.samples = 30;
  spec.magnitudes = {0.05, 0.1, 0.2};
  spec.workers = 3;
  const NoiseReport r = noise_mc(spec, s, ramp, ghz_state(two), 5);
  CHECK(r.samples.size() + static_cast<std::size_t>(r.excluded) == 30);
  CHECK(r.summary.size() == 3);
  CHECK(r.reference_rms == loss(run_forward(flat_state(two), s, ramp), ghz_state(two)).rms);
  for (std::size_t i = 1; i < r.samples.size(); ++i) CHECK(r.samples[i].index > r.samples[i - 1].index);
  spec.workers = 1;
  const NoiseReport serial = noise_mc(spec, s, ramp, ghz_state(two), 5);
  REQUIRE(serial.samples.size() == r.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) CHECK(serial.samples[i].rms == r.samples[i].rms);
  CHECK(serial.slope == r.slope);
}

TEST_CASE("anneal-train run writes every output and is byte-reproducible") {
  const fs::path a = scratch_dir("anneal_a");
  const fs::path b = scratch_dir("anneal_b");
  run_experiment(config_from_json(small_config("anneal-train", a)));
  run_experiment(config_from_json(small_config("anneal-train", b)));
  for (const char* f : {"errors.csv", "schedule.csv", "schedule.json", "rho_series.csv", "spins.csv", "manifest.json"}) {
    CHECK(fs::exists(a / f));
  }
  CHECK(slurp(a / "errors.csv") == slurp(b / "errors.csv"));
  CHECK(slurp(a / "schedule.csv") == slurp(b / "schedule.csv"));
  CHECK(slurp(a / "errors.csv").rfind("epoch,rms,loss\n", 0) == 0);
  const json m = json::parse(slurp(a / "manifest.json"));
  CHECK(m["kind"] == "anneal-train");
  CHECK(m["summary"]["epochs"] == 4);
  // The manifest alone reproduces the run.
  json again = m["config"];
  const fs::path c = scratch_dir("anneal_c");
  again["output_dir"] = c.string();
  run_experiment(config_from_json(again));
  CHECK(slurp(a / "errors.csv") == slurp(c / "errors.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("unwritable output directory leaves nothing behind") {
  const fs::path base = scratch_dir("blocked");
  fs::create_directories(base);
  std::ofstream(base / "file") << "x";
  ExperimentConfig cfg = config_from_json(small_config("anneal-train", base / "file" / "run"));
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
  CHECK(fs::is_regular_file(base / "file"));
  CHECK(std::distance(fs::directory_iterator(base), fs::directory_iterator()) == 1);
  fs::remove_all(base);
}

TEST_CASE("size-bootstrap writes one directory per size") {
  const fs::path out = scratch_dir("size");
  json cfg = small_config("size-bootstrap", out);
  cfg["max_qubits"] = 4;
  cfg["training"]["max_epochs"] = 2;
  const RunSummary run = run_experiment(config_from_json(cfg));
  for (const char* d : {"n2", "n3", "n4"}) {
    CHECK(fs::exists(out / d / "errors.csv"));
    CHECK(fs::exists(out / d / "manifest.json"));
  }
  const auto& levels = run.manifest["summary"]["levels"];
  REQUIRE(levels.size() == 3);
  CHECK_FALSE(levels[0]["seeded"].get<bool>());
  CHECK(levels[1]["seeded"].get<bool>());
  const json n3 = json::parse(slurp(out / "n3" / "manifest.json"));
  CHECK(n3["config"]["seed_schedule_file"].get<std::string>().find("n2") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("broken-path run emits the spin curve") {
  const fs::path out = scratch_dir("path");
  json cfg = small_config("broken-path", out);
  cfg["path"] = {{"family", "Y"}, {"gamma_grid", {0.0, 0.5, 1.0}}};
  cfg["training"]["max_epochs"] = 2;
  run_experiment(config_from_json(cfg));
  const std::string spins = slurp(out / "spins.csv");
  CHECK(spins.rfind("gamma,qubit,mean_spin\n", 0) == 0);
  CHECK(std::count(spins.begin(), spins.end(), '\n') == 1 + 3 * 2);
  CHECK(fs::exists(out / "gamma_0.5000" / "errors.csv"));
  CHECK(fs::exists(out / "gamma_1.0000" / "spins.csv"));
  fs::remove_all(out);
}

TEST_CASE("spin_curve rows at gamma zero vanish") {
  const fs::path out = scratch_dir("spins");
  fs::create_directories(out);
  GammaResult g;
  g.gamma = 0.0;
  g.spins = spin_averages(flat_state(QubitCount(2)));
  spin_curve({g}, out / "s.csv");
  std::ifstream in(out / "s.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(std::abs(v) < 1e-12);
  }
  CHECK(rows == 2);
  fs::remove_all(out);
}

TEST_CASE("noise-mc and monotone runs") {
  const fs::path root = scratch_dir("report");
  const fs::path out = root / "noise";
  json cfg = small_config("noise-mc", out);
  cfg["noise"] = {{"samples", 12}, {"magnitudes", {0.05, 0.1}}, {"workers", 2}};
  const RunSummary run = run_experiment(config_from_json(cfg));
  CHECK(run.manifest["noise_mode"] == kNoiseMode);
  CHECK(run.manifest["summary"]["samples"].get<int>() + run.manifest["summary"]["excluded"].get<int>() == 12);
  CHECK(run.manifest["summary"]["reference_rms"] == run.manifest["summary"]["training"]["final_rms"]);
  CHECK(fs::exists(out / "noise_samples.csv"));
  CHECK(fs::exists(out / "trained" / "schedule.csv"));

  const fs::path mono = root / "mono";
  json mcfg = small_config("monotone", mono);
  mcfg["training"]["max_epochs"] = 3;
  run_experiment(config_from_json(mcfg));
  CHECK(fs::exists(mono / "sw.csv"));
  CHECK(fs::exists(mono / "errors.csv"));

  const std::string report = render_report(root);
  CHECK(report.find("noise-mc") != std::string::npos);
  CHECK(report.find("monotone") != std::string::npos);
  fs::remove_all(root);
}
