#pragma once

// Finite-dimensional Galerkin system in the first n cosine eigenmodes,
// integrated with an embedded explicit Runge-Kutta pair. It shares no time
// discretisation with the IMEX solver, which makes it a useful oracle.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "tumorlab/potentials.hpp"
#include "tumorlab/solver.hpp"
#include "tumorlab/spectral.hpp"

namespace tumorlab {

struct GalerkinState {
  Grid grid;
  /// Flat mode indices on `grid`, in eigenvalue order; modes[0] is constant.
  std::vector<std::size_t> modes;
  std::vector<double> a;
  std::vector<double> b;
  double t = 0.0;

  std::size_t n() const { return a.size(); }
};

/// Orthogonal projection onto the first n modes. Throws std::invalid_argument
/// when n is zero or exceeds the number of grid modes.
GalerkinState project_initial(const State& state, std::size_t n);

/// Grid fields of the truncated expansion.
State galerkin_to_state(const GalerkinState& gs);

struct GalerkinOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Quadrature grid refinement for nonlinear inner products.
  int padding = 2;
  /// Give up once the accepted step falls below this.
  double min_step = 1e-14;
  std::size_t max_steps = 50'000'000;
};

struct GalerkinDerivative {
  std::vector<double> da;
  std::vector<double> db;
};

GalerkinDerivative galerkin_rhs(const GalerkinState& gs, const ModelParams& params, const GalerkinOptions& opts = {});

/// Energy and dissipation of the truncated fields, by quadrature on the
/// padded grid.
EnergyReport galerkin_energy(const GalerkinState& gs, const ModelParams& params, const GalerkinOptions& opts = {});

struct GalerkinSample {
  double t = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  EnergyReport report;
  /// Time integral of the total dissipation since the start.
  double dissipated = 0.0;
};

struct GalerkinTrajectory {
  std::vector<GalerkinSample> samples;
  GalerkinState final_state;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  /// max over samples of |E(t) + dissipated(t) - E(0)|.
  double identity_defect = 0.0;
};

class GalerkinStiffness : public std::runtime_error {
 public:
  GalerkinStiffness(const std::string& what, std::size_t mode) : std::runtime_error(what), mode_index(mode) {}
  /// Position in eigenvalue order of the mode dominating the error estimate.
  std::size_t mode_index;
};

/// Integrates to gs.t + T, sampling every `dt` (and at the end).
GalerkinTrajectory integrate_galerkin(const GalerkinState& gs, const ModelParams& params, double T, double dt,
                                      const GalerkinOptions& opts = {});

/// Columns t, a_1..a_n, b_1..b_n after a seed comment line.
void write_coefficients_csv(std::ostream& out, const GalerkinTrajectory& traj, std::uint64_t seed);

struct CrossvalReport {
  std::vector<double> times;
  /// sqrt(||phi_gal - phi_imex||^2 + ||sigma_gal - sigma_imex||^2) per sample.
  std::vector<double> gaps;
  double max_gap = 0.0;
  /// Gap at the horizon, the figure the threshold applies to.
  double final_gap = 0.0;
  std::size_t galerkin_steps = 0;
  std::size_t solver_steps = 0;
};

/// Runs the n-mode Galerkin system and the IMEX solver restricted to the
/// same n modes (initial data and every stage truncated) side by side.
CrossvalReport cross_validate(const State& initial, const ModelParams& params, std::size_t n, double T,
                              double sample_dt, double solver_dt, const GalerkinOptions& opts = {});

/// Columns t, l2_gap after a seed comment line.
void write_crossval_csv(std::ostream& out, const CrossvalReport& rep, std::uint64_t seed);

}  // namespace tumorlab
