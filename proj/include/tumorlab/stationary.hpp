#pragma once

// Stationary states on the mass level set
//   Z_M = {(phi, sigma) : int (phi + sigma) = |Omega| M},
// where -Lap phi + Psi'(phi) - chi_phi sigma = mu0 and
// chi_sigma sigma + chi_phi (1 - phi) = mu0 for a single constant mu0.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tumorlab/potentials.hpp"
#include "tumorlab/solver.hpp"
#include "tumorlab/spectral.hpp"

namespace tumorlab {

struct StationaryResiduals {
  /// L2 norm of -Lap phi + Psi'(phi) - chi_phi sigma - mu0.
  double r1 = 0.0;
  /// sup |chi_sigma sigma + chi_phi (1 - phi) - mu0|.
  double r2 = 0.0;
  /// |int (phi + sigma) - |Omega| M|.
  double r3 = 0.0;
  /// mean of Psi'(phi) - chi_phi sigma.
  double mu0 = 0.0;
};

struct StationaryPoint {
  Field phi_star;
  Field sigma_star;
  double mu0 = 0.0;
  double M = 0.0;
  double E_value = 0.0;
  StationaryResiduals residuals;
  std::size_t iterations = 0;
  bool converged = false;
  /// Energy after each accepted iteration, starting with the initial value.
  std::vector<double> energy_trace;
};

/// Shifts phi and sigma by the same constant onto Z_M.
State project_Z_M(const State& state, double M);

StationaryResiduals stationary_residual(const Field& phi, const Field& sigma, double M, const ModelParams& params);

struct MinimizeOptions {
  /// Stop once the L2 norm of the reduced gradient is below this and its
  /// mean below tol / 100.
  double tol = 1e-9;
  std::size_t max_iterations = 20000;
  double armijo = 1e-4;
};

/// Minimises E over Z_M. sigma is eliminated through the second
/// stationarity equation, which holds exactly at every iterate; phi then
/// follows an A^{-1}-preconditioned gradient descent with Barzilai-Borwein
/// steps and Armijo backtracking. A run that stalls returns its best
/// iterate with converged = false.
StationaryPoint minimize_energy(const State& initial, double M, const ModelParams& params,
                                const MinimizeOptions& opts = {});

struct ConstantStateOptions {
  double lower = -3.0;
  double upper = 3.0;
  int subintervals = 600;
};

/// Every constant stationary state with a sign change of the reduced scalar
/// equation inside the bracket, in increasing order of phi.
std::vector<StationaryPoint> constant_states(const Grid& grid, double M, const ModelParams& params,
                                             const ConstantStateOptions& opts = {});

struct BoundednessReport {
  /// ||phi*||_H1 + ||sigma*||_L2 per converged run.
  std::vector<double> norms;
  double bound = 0.0;
  std::size_t runs = 0;
  std::size_t converged = 0;
  bool finite = true;
};

/// Minimises from `count` random initial states (seeds seed, seed+1, ...).
BoundednessReport boundedness_probe(const Grid& grid, double M, const ModelParams& params, std::size_t count,
                                    std::uint64_t seed, double amplitude = 0.5, const MinimizeOptions& opts = {});

struct CoercivityWitness {
  std::vector<double> scales;
  std::vector<double> energies;
  /// t^2 (1/2 ||grad phi||^2 + gap ||phi||^2) - K at each scale.
  std::vector<double> lower_bounds;
  /// min over scales >= 4 of (E + K) / t^2.
  double quadratic_coefficient = 0.0;
  bool bound_holds = true;
};

/// E along (t phi, t sigma) for t in [1, t_max].
CoercivityWitness coercivity_witness(const State& state, const ModelParams& params, double t_max = 8.0,
                                     int samples = 29);

/// Header M,chi_phi,chi_sigma,mu0,E_value,r1,r2,r3,iterations,converged.
void write_stationary_csv(std::ostream& out, const std::vector<StationaryPoint>& points, const ModelParams& params,
                          std::uint64_t seed);

}  // namespace tumorlab
