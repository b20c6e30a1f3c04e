#pragma once

// Time integration of the coupled phase-field / nutrient system
//
//   phi_t   = div(m(phi) grad mu) + p(phi) (N - mu)
//   mu      = -Lap phi + Psi'(phi) - chi_phi sigma
//   sigma_t = div(n(phi) grad N)  - p(phi) (N - mu),   N = chi_sigma sigma + chi_phi (1 - phi)
//
// with homogeneous Neumann conditions, which the cosine basis enforces.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tumorlab/potentials.hpp"
#include "tumorlab/spectral.hpp"

namespace tumorlab {

struct State {
  double t = 0.0;
  Field phi;
  Field sigma;

  State(double time, Field p, Field s);
};

struct EnergyReport {
  double E = 0.0;
  double gradient_term = 0.0;
  double potential_term = 0.0;
  double sigma_term = 0.0;
  double cross_term = 0.0;
  double D_mu = 0.0;
  double D_N = 0.0;
  double D_exchange = 0.0;
  double mass = 0.0;
  double dt_used = 0.0;

  double dissipation() const { return D_mu + D_N + D_exchange; }
};

Field chemical_potential(const Field& phi, const Field& sigma, const ModelParams& params);
/// N = chi_sigma sigma + chi_phi (1 - phi).
Field nutrient_potential(const Field& phi, const Field& sigma, const ModelParams& params);
EnergyReport energy(const State& state, const ModelParams& params);

struct SchemeOptions {
  /// Convex-splitting shift S. When unset, S = max Psi'' over
  /// [min phi - 1, max phi + 1] at the start of each step.
  std::optional<double> stabilization;
  bool energy_guard = true;
  int max_retries = 20;
  /// RK4 substeps for the pointwise exchange stage.
  int exchange_substeps = 1;
  /// Keep only the first n modes (ordered by eigenvalue) after each stage.
  std::optional<std::size_t> mode_cutoff;
};

struct StepResult {
  State state;
  EnergyReport report;
  int retries = 0;
};

class StepRejected : public std::runtime_error {
 public:
  StepRejected(const std::string& what, EnergyReport last) : std::runtime_error(what), last_report(last) {}
  EnergyReport last_report;
};

/// One guarded step. With the guard on, dt is halved until
/// E_new <= E_old + 1e-10 (1 + |E_old|); report.dt_used holds the accepted dt.
StepResult step(const State& state, const ModelParams& params, double dt, const SchemeOptions& opts = {});
/// Same, with the energy of the incoming state already known.
StepResult step(const State& state, double E_old, const ModelParams& params, double dt,
                const SchemeOptions& opts = {});

/// Unguarded single step with exactly the given dt.
State advance(const State& state, const ModelParams& params, double dt, const SchemeOptions& opts = {});

/// Zeroes every mode outside the first n in eigenvalue order.
Field truncate_modes(const Field& field, std::size_t n);

/// Everything written to one energy CSV row.
struct StepRecord {
  double t = 0.0;
  EnergyReport report;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double h1_phi = 0.0;
  double l2_sigma = 0.0;
  double h1dual_phit = 0.0;
  double h1dual_sigmat = 0.0;
};

StepRecord make_record(const State& state, const EnergyReport& report, const State* previous);

struct RunOptions {
  double dt = 1e-3;
  SchemeOptions scheme;
  /// Invoke the snapshot callback every this many accepted steps (0 = never).
  int snapshot_every = 0;
};

struct RunSummary {
  State final_state;
  EnergyReport final_report;
  double phi_min = 0.0;
  double phi_max = 0.0;
  std::size_t steps = 0;
  std::size_t monotonicity_violations = 0;
  double mass_drift = 0.0;
  double initial_mass = 0.0;
};

struct RunObserver {
  /// Called for the initial state and then after every accepted step.
  std::function<void(const State&, const StepRecord&)> on_record;
  std::function<void(const State&, std::size_t step_index)> on_snapshot;
};

/// Integrates to time T; throws StepRejected when a step cannot be accepted.
RunSummary run(const State& initial, const ModelParams& params, double T, const RunOptions& opts,
               const RunObserver& observer = {});

/// Energy increase allowed per step before it counts as a violation.
inline double energy_tolerance(double E) { return 1e-10 * (1.0 + (E < 0 ? -E : E)); }

}  // namespace tumorlab
