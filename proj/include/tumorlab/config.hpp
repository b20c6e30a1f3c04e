#pragma once

// Sectioned key = value run configuration.
//
//   # comment
//   [grid]
//   dims = 2
//   lengths = 6.283185307179586, 6.283185307179586
//   resolution = 64, 64
//
// Lists are comma separated. Every key is optional; unknown sections or
// keys are errors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tumorlab/initial_data.hpp"
#include "tumorlab/potentials.hpp"
#include "tumorlab/solver.hpp"
#include "tumorlab/spectral.hpp"

namespace tumorlab {

struct GridConfig {
  int dims = 2;
  std::vector<double> lengths{6.283185307179586, 6.283185307179586};
  std::vector<int> resolution{64, 64};

  Grid build() const;
  bool operator==(const GridConfig&) const = default;
};

struct TimeConfig {
  double T = 5.0;
  double dt = 1e-3;
  bool guard = true;
  int max_retries = 20;
  int exchange_substeps = 1;
  std::optional<double> stabilization;
  std::optional<std::size_t> mode_cutoff;
  /// Accepted steps between snapshots; 0 disables them.
  int snapshot_every = 0;

  SchemeOptions scheme() const;
  bool operator==(const TimeConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool snapshots = true;
  bool field_csv = false;
  bool png = false;

  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  double epsilon = 1e-3;
  std::vector<double> dependence_times{0.1, 0.5, 1.0};
  double dependence_dt = 1e-3;
  double omega_T = 200.0;
  double omega_dt = 1e-2;
  double velocity_tol = 1e-6;
  double regularity_from = 1.0;
  double sanity_bound = 1e3;
  double sweep_T = 1.0;
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  std::vector<double> decay_times{0.01, 0.1, 1.0, 10.0};
  std::size_t decay_vectors = 100;

  bool operator==(const ExperimentConfig&) const = default;
};

struct StationaryConfig {
  double M = 0.0;
  double tol = 1e-9;
  std::size_t max_iterations = 20000;
  /// Random starts for the boundedness probe.
  std::size_t starts = 10;
  double amplitude = 0.5;

  bool operator==(const StationaryConfig&) const = default;
};

struct GalerkinConfig {
  std::size_t modes = 16;
  double T = 0.1;
  double sample_dt = 0.01;
  double rtol = 1e-9;
  double atol = 1e-12;
  int padding = 2;
  /// Step of the truncation-matched solver run in the crossval command.
  double crossval_dt = 1e-5;

  bool operator==(const GalerkinConfig&) const = default;
};

struct RunConfig {
  GridConfig grid;
  ModelParams model;
  InitialDataSpec initial;
  TimeConfig time;
  OutputConfig output;
  ExperimentConfig experiment;
  StationaryConfig stationary;
  GalerkinConfig galerkin;
  /// Filled by parse_config; not part of equality.
  AssumptionReport validation;

  bool operator==(const RunConfig& o) const {
    return grid == o.grid && model == o.model && initial == o.initial && time == o.time && output == o.output &&
           experiment == o.experiment && stationary == o.stationary && galerkin == o.galerkin;
  }
};

class ConfigError : public std::runtime_error {
 public:
  /// line is 0 when the problem is not tied to a single line.
  ConfigError(const std::string& message, std::size_t line, std::string field);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Parses and validates; throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every key, in a form parse_config reads back to an equal config.
std::string serialize_config(const RunConfig& config);

/// Structural and assumption checks; throws ConfigError on the first failure.
AssumptionReport validate_config(const RunConfig& config);

/// Edit distance, used for "did you mean" hints.
std::size_t levenshtein(const std::string& a, const std::string& b);

}  // namespace tumorlab
