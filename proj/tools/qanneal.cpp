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

// Command-line front end: one verb per experiment kind plus `report`.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qanneal/errors.hpp"
#include "qanneal/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kDiverged = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  bool quiet = false;
};

nlohmann::json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw qanneal::IoError("cannot read config " + file);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw qanneal::ConfigError({"config " + file + " is not valid JSON: " + e.what()});
  }
}

int run_verb(const std::string& kind, const Options& opt) {
  nlohmann::json j = opt.config.empty() ? nlohmann::json::object() : read_json(opt.config);
  if (!j.is_object()) throw qanneal::ConfigError({"config must be a JSON object"});
  j["kind"] = kind;
  if (!opt.out.empty()) j["output_dir"] = opt.out;
  if (opt.seed) j["rng_seed"] = *opt.seed;
  if (opt.epochs) j["training"]["max_epochs"] = *opt.epochs;

  const qanneal::ExperimentConfig cfg = qanneal::config_from_json(j);
  qanneal::EpochCallback progress;
  if (!opt.quiet) {
    progress = [](const qanneal::LossReport& r) {
      if (r.epoch % 10 == 0) std::fprintf(stderr, "epoch %5d  rms %.6e  loss %.6e\n", r.epoch, r.rms, r.loss);
    };
  }
  const qanneal::RunSummary run = qanneal::run_experiment(cfg, progress);
  if (!opt.quiet) std::cout << run.manifest["summary"].dump(2) << '\n';
  std::cout << "wrote " << run.output_dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn annealing schedules that steer a qubit register to a target state"};
  app.set_version_flag("--version", qanneal::kVersion);
  app.require_subcommand(1);

  Options opt;
  const std::pair<const char*, const char*> verbs[] = {
      {"train", "anneal-train"}, {"bootstrap", "size-bootstrap"}, {"path", "broken-path"},
      {"noise", "noise-mc"},     {"monotone", "monotone"},
  };
  std::vector<std::pair<CLI::App*, std::string>> commands;
  for (const auto& [verb, kind] : verbs) {
    CLI::App* sub = app.add_subcommand(verb, std::string("run experiment kind ") + kind);
    sub->add_option("--config", opt.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
    sub->add_option("--seed", opt.seed, "RNG seed (overrides rng_seed)");
    sub->add_option("--epochs", opt.epochs, "epoch limit (overrides training.max_epochs)");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    commands.emplace_back(sub, kind);
  }
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize the manifests below a directory");
  report->add_option("dir", report_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      std::cout << qanneal::render_report(report_dir);
      return kOk;
    }
    for (const auto& [sub, kind] : commands) {
      if (sub->parsed()) return run_verb(kind, opt);
    }
  } catch (const qanneal::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const qanneal::DivergedError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const qanneal::DegenerateScheduleError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const qanneal::OverflowError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const qanneal::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const qanneal::ArgumentError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kOk;
}
