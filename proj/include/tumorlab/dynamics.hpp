#pragma once

// Long-time experiments on top of the solver: Lyapunov audits, convergence
// to stationary points, perturbation growth and attractor-scale norms.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tumorlab/initial_data.hpp"
#include "tumorlab/solver.hpp"
#include "tumorlab/stationary.hpp"

namespace tumorlab {

struct LyapunovViolation {
  /// Index into the audited record list.
  std::size_t row = 0;
  double t = 0.0;
  double E_previous = 0.0;
  double E = 0.0;
};

/// Rows whose energy exceeds the previous row's by more than 1e-10 (1 + |E|).
std::vector<LyapunovViolation> lyapunov_audit(const std::vector<StepRecord>& records);
/// Reads an energy CSV first; malformed input throws std::runtime_error.
std::vector<LyapunovViolation> lyapunov_audit(std::istream& energy_csv);

struct OmegaOptions {
  double T = 200.0;
  double dt = 1e-2;
  /// Converged once both dual-norm velocities are below this.
  double velocity_tol = 1e-6;
  SchemeOptions scheme;
};

struct OmegaLimitReport {
  double velocity_phi = 0.0;
  double velocity_sigma = 0.0;
  /// L2 x L2 distance to the nearest known stationary point.
  double distance_to_known = 0.0;
  /// Index of that point in the known list (constant states first).
  std::size_t nearest = 0;
  std::vector<StationaryPoint> known_points;
  double energy_plateau = 0.0;
  double M = 0.0;
  StationaryResiduals residuals;
  std::size_t steps = 0;
  bool converged = false;
  std::optional<State> final_state;
};

/// `extra_known` adds cached minimisers to the constant states.
OmegaLimitReport omega_limit_probe(const State& initial, const ModelParams& params, const OmegaOptions& opts = {},
                                   const std::vector<StationaryPoint>& extra_known = {});

struct DependenceOptions {
  double epsilon = 1e-3;
  std::vector<double> times{0.1, 0.5, 1.0};
  /// Fixed step; the energy guard is switched off so all three runs share
  /// the same time grid.
  double dt = 1e-3;
  /// Perturbation direction for phi; a smooth low-mode field when unset.
  std::optional<Field> direction;
};

struct DependenceReport {
  double epsilon = 0.0;
  std::vector<double> times;
  double d0_full = 0.0;
  double d0_half = 0.0;
  /// ||phi difference||_{H1*} + ||sigma difference||_{H1*} against the base run.
  std::vector<double> d_full;
  std::vector<double> d_half;
  /// d_full / d_half.
  std::vector<double> ratios;
  /// d_full(t) / d_full(0).
  std::vector<double> growth;
};

/// Smooth unit-L2 field built from the lowest nonconstant modes.
Field smooth_direction(const Grid& grid);

/// Requires unit mobilities and the P2 proliferation mode; throws
/// std::invalid_argument otherwise.
DependenceReport continuous_dependence_experiment(const State& base, const ModelParams& params,
                                                  const DependenceOptions& opts = {});

struct RegularityOptions {
  /// Only snapshots with t >= t_from enter the sup and median.
  double t_from = 1.0;
  double sanity_bound = 1e3;
};

struct RegularityReport {
  std::vector<double> times;
  std::vector<double> h3_phi;
  std::vector<double> h1_sigma;
  double sup_h3_phi = 0.0;
  double sup_h1_sigma = 0.0;
  /// max / median of h3_phi over the window.
  double max_over_median = 0.0;
  bool finite = true;
  bool flagged = false;
};

RegularityReport regularity_probe(const std::vector<State>& snapshots, const RegularityOptions& opts = {});

struct SweepOptions {
  std::vector<double> lengths{6.283185307179586, 6.283185307179586};
  std::vector<int> resolution{32, 32};
  double T = 1.0;
  double dt = 1e-3;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  InitialDataSpec initial;
};

struct SweepEntry {
  double chi_phi = 0.0;
  double chi_sigma = 0.0;
  double p0 = 0.0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t violations = 0;
  double mass_drift = 0.0;
  double E_initial = 0.0;
  double E_final = 0.0;
};

/// The twelve (chi_phi, chi_sigma, p0) combinations of the Lyapunov sweep.
std::vector<ModelParams> sweep_parameter_sets(const ModelParams& base);

/// Guarded runs over every parameter set and seed.
std::vector<SweepEntry> lyapunov_sweep(const ModelParams& base, const SweepOptions& opts = {});

void write_dependence_csv(std::ostream& out, const DependenceReport& rep, std::uint64_t seed);
void write_omega_summary(std::ostream& out, const OmegaLimitReport& rep);
void write_regularity_csv(std::ostream& out, const RegularityReport& rep, std::uint64_t seed);
void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& entries);

}  // namespace tumorlab
