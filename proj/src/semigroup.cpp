#include "tumorlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "tumorlab/format.hpp"

namespace tumorlab {

ModeBlock mode_block(double lambda, const ModelParams& params, double R1) {
  if (!(lambda >= 1.0)) throw std::invalid_argument("mode eigenvalue must be at least 1");
  ModeBlock b;
  b.lambda = lambda;
  const double a11 = -lambda * lambda - R1 * lambda;
  const double a12 = params.chi_phi * lambda;
  const double a22 = -params.chi_sigma * lambda;
  b.matrix = {a11, a12, a12, a22};
  const double m = 0.5 * (a11 + a22);
  const double r = std::hypot(0.5 * (a11 - a22), a12);
  b.eigenvalues = {m - r, m + r};
  b.spectral_abscissa = m + r;
  return b;
}

namespace {

// exp(tM) = alpha I + beta (M - mI) with m the mean eigenvalue.
std::array<double, 4> block_exponential(const ModeBlock& b, double t) {
  const double m = 0.5 * (b.matrix[0] + b.matrix[3]);
  const double r = 0.5 * (b.eigenvalues[1] - b.eigenvalues[0]);
  const double ep = std::exp(b.eigenvalues[1] * t), em = std::exp(b.eigenvalues[0] * t);
  const double alpha = 0.5 * (ep + em);
  double beta;
  if (r * t < 0.5) {
    // Difference of close exponentials; use sinh to keep the digits.
    beta = r > 0.0 ? std::exp(m * t) * std::sinh(r * t) / r : t * std::exp(m * t);
  } else {
    beta = (ep - em) / (2.0 * r);
  }
  return {alpha + beta * (b.matrix[0] - m), beta * b.matrix[1], beta * b.matrix[2], alpha + beta * (b.matrix[3] - m)};
}

// Spectral norm of a 2x2 matrix.
double norm2(double a, double b, double c, double d) {
  const double s = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
  return std::sqrt(0.5 * (s + disc));
}

}  // namespace

Vec2 evolve_mode(const ModeBlock& block, const Vec2& z0, double t) {
  if (t < 0.0) throw std::invalid_argument("evolution time must be nonnegative");
  const auto e = block_exponential(block, t);
  return {e[0] * z0[0] + e[1] * z0[1], e[2] * z0[0] + e[3] * z0[1]};
}

double smoothing_gain(const ModeBlock& block, double t) {
  const auto e = block_exponential(block, t);
  const double sl = std::sqrt(block.lambda);
  // diag(sqrt(lambda), 1) exp(tM) diag(sqrt(lambda), sqrt(lambda)).
  return norm2(sl * sl * e[0], sl * sl * e[1], sl * e[2], sl * e[3]);
}

double decay_gain(const ModeBlock& block, double t) {
  const auto e = block_exponential(block, t);
  const double sl = std::sqrt(block.lambda);
  // diag(sqrt(lambda), 1) exp(tM) diag(1/sqrt(lambda), 1).
  return norm2(e[0], sl * e[1], e[2] / sl, e[3]);
}

DecayReport decay_constants(const ModelParams& params, double R1, const Grid& grid, const DecayOptions& opts) {
  std::vector<double> lambdas(grid.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) lambdas[k] = grid.eigenvalue(k);
  return decay_constants(params, R1, lambdas, opts);
}

DecayReport decay_constants(const ModelParams& params, double R1, const std::vector<double>& lambdas,
                            const DecayOptions& opts) {
  if (lambdas.empty()) throw std::invalid_argument("decay check needs at least one mode");
  DecayReport rep;
  const std::size_t n = lambdas.size();
  rep.n_modes = n;
  std::vector<ModeBlock> blocks;
  blocks.reserve(n);
  rep.omega1 = INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    blocks.push_back(mode_block(lambdas[k], params, R1));
    rep.lambdas.push_back(blocks.back().lambda);
    rep.abscissae.push_back(blocks.back().spectral_abscissa);
    const double rate = -blocks.back().spectral_abscissa;
    if (rate < rep.omega1) {
      rep.omega1 = rate;
      rep.slowest_mode = k;
    }
  }
  rep.omega2 = 0.5 * rep.omega1;

  // Decay bound on random vectors spanning every mode.
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double t : opts.t_samples) {
    const double envelope = std::exp(-rep.omega1 * t);
    for (std::size_t v = 0; v < opts.random_vectors; ++v) {
      double before = 0.0, after = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const Vec2 z{gauss(rng), gauss(rng)};
        const Vec2 zt = evolve_mode(blocks[k], z, t);
        const double lam = blocks[k].lambda;
        before += lam * z[0] * z[0] + z[1] * z[1];
        after += lam * zt[0] * zt[0] + zt[1] * zt[1];
      }
      const double ratio = std::sqrt(after / before) / envelope;
      rep.max_decay_ratio = std::max(rep.max_decay_ratio, ratio);
      if (ratio > 2.0) rep.violations.push_back({n, t, ratio});
    }
    // Per-mode operator norms are the sharp version of the same check.
    for (std::size_t k = 0; k < n; ++k) {
      const double ratio = decay_gain(blocks[k], t) / envelope;
      rep.max_decay_ratio = std::max(rep.max_decay_ratio, ratio);
      if (ratio > 2.0) rep.violations.push_back({k, t, ratio});
    }
  }

  // Smoothing: sqrt(t) e^{omega2 t} gain over grid modes and log-spaced times.
  const int ns = std::max(2, opts.smoothing_samples);
  for (int i = 0; i < ns; ++i) {
    const double t = opts.smoothing_t_min * std::pow(opts.smoothing_t_max / opts.smoothing_t_min,
                                                     static_cast<double>(i) / (ns - 1));
    const double w = std::sqrt(t) * std::exp(rep.omega2 * t);
    for (const auto& b : blocks) rep.smoothing_constant = std::max(rep.smoothing_constant, w * smoothing_gain(b, t));
  }

  // Small-t slope of sup over lambda in [1, slope_lambda_max] of the gain.
  std::vector<ModeBlock> sweep;
  const int nl = 400;
  for (int j = 0; j < nl; ++j) {
    sweep.push_back(mode_block(std::pow(opts.slope_lambda_max, static_cast<double>(j) / (nl - 1)), params, R1));
  }
  const int nt = 11;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double t = opts.slope_t_min * std::pow(opts.slope_t_max / opts.slope_t_min, static_cast<double>(i) / (nt - 1));
    double g = 0.0;
    for (const auto& b : sweep) g = std::max(g, smoothing_gain(b, t));
    const double x = std::log(t), y = std::log(g);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.smoothing_slope = (nt * sxy - sx * sy) / (nt * sxx - sx * sx);
  return rep;
}

CertificateReport stability_certificate(const CertificateOptions& opts) {
  CertificateReport rep;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int nl = std::max(2, opts.lambda_samples);
  std::vector<double> lambdas(nl);
  for (int j = 0; j < nl; ++j) lambdas[j] = std::pow(opts.lambda_max, static_cast<double>(j) / (nl - 1));

  for (std::size_t s = 0; s < opts.parameter_sets; ++s) {
    ModelParams params;
    params.chi_phi = 2.0 * unit(rng);
    params.chi_sigma = 0.1 + 4.9 * unit(rng);
    const double R1 = 2.0 * params.chi_phi * params.chi_phi / params.chi_sigma + 0.01 + 4.99 * unit(rng);
    ++rep.parameter_sets;
    for (double lam : lambdas) {
      const ModeBlock b = mode_block(lam, params, R1);
      const double trace = b.matrix[0] + b.matrix[3];
      const double det = b.matrix[0] * b.matrix[3] - b.matrix[1] * b.matrix[2];
      ++rep.blocks;
      if (!(det > 0.0) || !(trace < 0.0) || !(b.spectral_abscissa < 0.0)) ++rep.unstable_blocks;
      rep.max_abscissa = std::max(rep.max_abscissa, b.spectral_abscissa);
    }
    DecayOptions d = opts.decay;
    d.seed = opts.seed + 1000003 * (s + 1);
    d.slope_lambda_max = opts.lambda_max;
    const DecayReport dr = decay_constants(params, R1, lambdas, d);
    rep.max_decay_ratio = std::max(rep.max_decay_ratio, dr.max_decay_ratio);
    rep.decay_violations += dr.violations.size();
    rep.max_smoothing_constant = std::max(rep.max_smoothing_constant, dr.smoothing_constant);
    rep.min_slope = std::min(rep.min_slope, dr.smoothing_slope);
    rep.max_slope = std::max(rep.max_slope, dr.smoothing_slope);
  }
  return rep;
}

void write_decay_csv(std::ostream& out, const DecayReport& rep, std::uint64_t seed) {
  out << "# seed=" << seed << "\nlambda,abscissa,slowest\n";
  for (std::size_t k = 0; k < rep.lambdas.size(); ++k) {
    out << format_double(rep.lambdas[k]) << ',' << format_double(rep.abscissae[k]) << ','
        << (k == rep.slowest_mode ? 1 : 0) << "\n";
  }
}

void write_decay_summary(std::ostream& out, const DecayReport& rep) {
  out << "omega1 = " << format_double(rep.omega1) << "\n";
  out << "omega2 = " << format_double(rep.omega2) << "\n";
  out << "smoothing_constant = " << format_double(rep.smoothing_constant) << "\n";
  out << "smoothing_slope = " << format_double(rep.smoothing_slope) << "\n";
  out << "max_decay_ratio = " << format_double(rep.max_decay_ratio) << "\n";
  out << "n_modes = " << rep.n_modes << "\n";
  out << "violations = " << rep.violations.size() << "\n";
}

}  // namespace tumorlab
