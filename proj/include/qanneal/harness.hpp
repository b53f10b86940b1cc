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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "qanneal/adjoint.hpp"

namespace qanneal {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRngName = "mt19937_64/box-muller";
inline constexpr const char* kNoiseMode = "complex-gaussian-entrywise";

enum class ExperimentKind { AnnealTrain, SizeBootstrap, BrokenPath, NoiseMc, Monotone };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct NoiseSpec {
  int samples = 1000;
  std::vector<double> magnitudes = default_magnitudes();
  int workers = 0;  // 0: one per hardware thread

  static std::vector<double> default_magnitudes();
};

struct MonotoneSpec {
  MonotoneRates rates;
  double zeta_final_init = 8e-4;
  double eps_final_init = 0.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::AnnealTrain;
  int n = 2;
  std::optional<std::string> path_family;
  std::vector<double> gamma_grid = PathSpec::default_gamma_grid();
  TrainingConfig training;
  BetaRamp ramp{2500.0, 5000.0};
  double dt = 2.5;
  double k0 = 1.5e-3;
  double ramp_end_fraction = kDefaultRampEnd;
  std::optional<std::filesystem::path> seed_schedule_file;
  std::uint64_t rng_seed = 0;
  std::filesystem::path output_dir;
  NoiseSpec noise;
  MonotoneSpec monotone;
  std::string target = "ghz";         // ghz, w, flat or <family>@<gamma>
  std::string initial_state = "flat";  // flat, path_start or <family>@<gamma>
  int max_qubits = 6;                  // last size of a size-bootstrap chain
  int rho_stride = 10;

  int timesteps() const;
  // Throws ConfigError listing every violation.
  void validate() const;
};

// Fills defaults for absent fields; the kind selects epoch and trainable-mask defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& file);

// Density matrix named by `flat`, `ghz`, `w` or `<family>@<gamma>`.
ComplexMatrix named_state(const std::string& name, QubitCount n);

ScheduleSet initial_schedule(const ExperimentConfig& cfg, QubitCount n);

// Complex Gaussian normal deviates from a portable Box-Muller transform.
class NoiseSource {
 public:
  explicit NoiseSource(std::seed_seq& seq) : engine_(seq) {}
  double normal();
  Complex complex_normal();  // E|z|^2 = 1

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct PerturbedState {
  ComplexMatrix rho;
  double magnitude = 0.0;  // ||rho - flat||_F / ||flat||_F
};

// Flat state plus entrywise complex noise of relative size `magnitude`,
// Hermitized and rescaled to unit trace. Non-positive traces are redrawn.
PerturbedState perturb_flat(QubitCount n, double magnitude, NoiseSource& rng);

struct NoiseSample {
  int index = 0;
  double nominal = 0.0;
  double magnitude = 0.0;
  double rms = 0.0;
};

struct MagnitudeSummary {
  double nominal = 0.0;
  int count = 0;
  double mean_magnitude = 0.0;
  double max_rms = 0.0;
  double mean_rms = 0.0;
};

struct NoiseReport {
  std::vector<NoiseSample> samples;  // sorted by index
  std::vector<MagnitudeSummary> summary;
  int excluded = 0;
  double reference_rms = 0.0;  // unperturbed flat state
  double slope = 0.0;          // least squares of max_rms on mean_magnitude
  double intercept = 0.0;
};

NoiseReport noise_mc(const NoiseSpec& spec, const ScheduleSet& trained, const BetaRamp& ramp,
                     const ComplexMatrix& rho_des, std::uint64_t rng_seed);

// gamma,qubit,mean_spin rows for every trained endpoint.
void spin_curve(const std::vector<GammaResult>& results, const std::filesystem::path& csv);

void write_errors(const std::vector<LossReport>& history, const std::filesystem::path& csv);

struct RunSummary {
  std::filesystem::path output_dir;
  nlohmann::json manifest;
};

// Dispatches on cfg.kind and writes every output under cfg.output_dir.
RunSummary run_experiment(const ExperimentConfig& cfg, const EpochCallback& progress = {});

// One row per manifest found below `root`.
std::string render_report(const std::filesystem::path& root);

}  // namespace qanneal
