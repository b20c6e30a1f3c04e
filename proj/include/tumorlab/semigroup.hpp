#pragma once

// Linearised evolution about a state with potential curvature R1, split
// into one symmetric 2x2 block per eigenvalue lambda of A:
//
//   d/dt (phi_hat, sigma_hat) = [[-lambda^2 - R1 lambda, chi_phi lambda],
//                                [ chi_phi lambda,       -chi_sigma lambda]] (phi_hat, sigma_hat).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tumorlab/potentials.hpp"
#include "tumorlab/spectral.hpp"

namespace tumorlab {

using Vec2 = std::array<double, 2>;

struct ModeBlock {
  double lambda = 1.0;
  /// Row-major entries a11, a12, a21, a22.
  std::array<double, 4> matrix{};
  /// Eigenvalues, smaller first.
  Vec2 eigenvalues{};
  /// Largest eigenvalue.
  double spectral_abscissa = 0.0;
};

/// Throws std::invalid_argument for lambda < 1.
ModeBlock mode_block(double lambda, const ModelParams& params, double R1);

/// exp(t M) z0 in closed form.
Vec2 evolve_mode(const ModeBlock& block, const Vec2& z0, double t);

/// Operator norm of exp(t M) from H1* x H1* (weights 1/lambda, 1/lambda) to
/// H1 x L2 (weights lambda, 1).
double smoothing_gain(const ModeBlock& block, double t);

/// Operator norm of exp(t M) on H1 x L2.
double decay_gain(const ModeBlock& block, double t);

struct DecayOptions {
  std::vector<double> t_samples{0.01, 0.1, 1.0, 10.0};
  /// Random test vectors (over all modes at once) per time sample.
  std::size_t random_vectors = 100;
  std::uint64_t seed = 1;
  /// Times for the smoothing sweep, log-spaced over [smoothing_t_min, smoothing_t_max].
  double smoothing_t_min = 1e-4;
  double smoothing_t_max = 1e2;
  int smoothing_samples = 61;
  /// Window and lambda range for the small-t slope fit.
  double slope_t_min = 1e-3;
  double slope_t_max = 1e-2;
  double slope_lambda_max = 1e4;
};

struct DecayViolation {
  std::size_t mode = 0;
  double t = 0.0;
  double ratio = 0.0;
};

struct DecayReport {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double smoothing_constant = 0.0;
  /// Least-squares slope of log sup_lambda gain against log t.
  double smoothing_slope = 0.0;
  /// max over samples of ||T(t) z|| / (e^{-omega1 t} ||z||); the bound asks for <= 2.
  double max_decay_ratio = 0.0;
  std::size_t n_modes = 0;
  std::size_t slowest_mode = 0;
  std::vector<double> lambdas;
  std::vector<double> abscissae;
  std::vector<DecayViolation> violations;
};

/// Samples every cosine mode of `grid`.
DecayReport decay_constants(const ModelParams& params, double R1, const Grid& grid, const DecayOptions& opts = {});
/// Same checks on an explicit list of eigenvalues.
DecayReport decay_constants(const ModelParams& params, double R1, const std::vector<double>& lambdas,
                            const DecayOptions& opts = {});

struct CertificateOptions {
  std::size_t parameter_sets = 100;
  std::uint64_t seed = 1;
  double lambda_max = 1e4;
  /// Log-spaced eigenvalues per set, endpoints included.
  int lambda_samples = 200;
  DecayOptions decay;
};

struct CertificateReport {
  std::size_t parameter_sets = 0;
  std::size_t blocks = 0;
  /// Blocks with det <= 0, trace >= 0 or abscissa >= 0.
  std::size_t unstable_blocks = 0;
  double max_abscissa = -INFINITY;
  double max_decay_ratio = 0.0;
  std::size_t decay_violations = 0;
  double max_smoothing_constant = 0.0;
  double min_slope = INFINITY;
  double max_slope = -INFINITY;
};

/// Random (chi_phi, chi_sigma, R1) with R1 > 2 chi_phi^2 / chi_sigma, each
/// checked over lambda in [1, lambda_max].
CertificateReport stability_certificate(const CertificateOptions& opts = {});

/// Columns lambda, abscissa, slowest.
void write_decay_csv(std::ostream& out, const DecayReport& rep, std::uint64_t seed);
/// key = value lines.
void write_decay_summary(std::ostream& out, const DecayReport& rep);

}  // namespace tumorlab
