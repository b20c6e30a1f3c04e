#include "tumorlab/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "tumorlab/format.hpp"
#include "tumorlab/initial_data.hpp"

namespace tumorlab {

State project_Z_M(const State& state, double M) {
  const double vol = state.phi.grid.volume();
  const double shift = ((integral(state.phi) + integral(state.sigma)) / vol - M) / 2.0;
  State out = state;
  out.phi += -shift;
  out.sigma += -shift;
  return out;
}

StationaryResiduals stationary_residual(const Field& phi, const Field& sigma, double M, const ModelParams& params) {
  const Grid& grid = phi.grid;
  const double vol = grid.volume();
  StationaryResiduals r;
  Field source(grid);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    source[i] = psi_prime(params.psi, phi[i]) - params.chi_phi * sigma[i];
  }
  r.mu0 = integral(source) / vol;

  Field res = chemical_potential(phi, sigma, params);
  res += -r.mu0;
  r.r1 = l2_norm(res);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double n = params.chi_sigma * sigma[i] + params.chi_phi * (1.0 - phi[i]);
    r.r2 = std::max(r.r2, std::abs(n - r.mu0));
  }
  r.r3 = std::abs(integral(phi) + integral(sigma) - vol * M);
  return r;
}

namespace {

// Reduced problem in phi alone. sigma is fixed by
//   chi_sigma sigma + chi_phi (1 - phi) = nu,  int (phi + sigma) = |Omega| M,
// and the L2 gradient of E(phi, sigma(phi)) is then mu - nu.
class Reduced {
 public:
  Reduced(const Grid& grid, double M, const ModelParams& params)
      : grid_(grid), M_(M), params_(params), ell_(grid.size()) {
    if (!(params.chi_sigma > 0.0)) throw std::invalid_argument("chi_sigma must be positive");
    for (std::size_t k = 0; k < ell_.size(); ++k) ell_[k] = grid.laplacian_eigenvalue(k);
  }

  struct Eval {
    double E = 0.0;
    double nu = 0.0;
    Field sigma;
    Field gradient;
  };

  Eval evaluate(const Field& phi) const {
    const double vol = grid_.volume();
    const double cs = params_.chi_sigma, cp = params_.chi_phi;
    const double int_phi = integral(phi);
    Eval e{0.0, (cs * (vol * M_ - int_phi) + cp * (vol - int_phi)) / vol, Field(grid_), Field(grid_)};

    ModeRep a = to_modes(phi);
    double grad_term = 0.0;
    for (std::size_t k = 0; k < ell_.size(); ++k) {
      grad_term += 0.5 * ell_[k] * a.coefficients[k] * a.coefficients[k];
      a.coefficients[k] *= ell_[k];
    }
    const Field lap = from_modes(a);
    double pot = 0.0, sig = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double s = (e.nu - cp * (1.0 - phi[i])) / cs;
      const PsiValues v = psi_eval(params_.psi, phi[i]);
      e.sigma[i] = s;
      e.gradient[i] = lap[i] + v.dpsi - cp * s - e.nu;
      pot += v.psi;
      sig += s * s;
      cross += s * (1.0 - phi[i]);
    }
    const double dv = grid_.cell_volume();
    e.E = grad_term + dv * (pot + 0.5 * cs * sig + cp * cross);
    return e;
  }

 private:
  Grid grid_;
  double M_;
  ModelParams params_;
  std::vector<double> ell_;
};

StationaryPoint finish(const Field& phi, const Field& sigma, double M, const ModelParams& params) {
  StationaryPoint p{phi, sigma, 0.0, M, 0.0, {}, 0, false, {}};
  p.residuals = stationary_residual(phi, sigma, M, params);
  p.mu0 = p.residuals.mu0;
  p.E_value = energy(State(0.0, phi, sigma), params).E;
  return p;
}

}  // namespace

StationaryPoint minimize_energy(const State& initial, double M, const ModelParams& params,
                                const MinimizeOptions& opts) {
  const Grid& grid = initial.phi.grid;
  const Reduced reduced(grid, M, params);

  Field phi = initial.phi;
  auto cur = reduced.evaluate(phi);
  std::vector<double> trace{cur.E};
  double alpha = 1.0;
  std::size_t it = 0;
  bool converged = false;

  for (;; ++it) {
    // The mean of the gradient is nu - mu0; the pointwise sigma relation and
    // the mass constraint both need it well below tol.
    if (l2_norm(cur.gradient) <= opts.tol && std::abs(mean_value(cur.gradient)) <= 1e-2 * opts.tol) {
      converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    Field dir = apply_A_inv(cur.gradient);
    dir *= -1.0;
    const double slope = inner(cur.gradient, dir);
    // Rounding in E limits how small a decrease can be resolved.
    const double slack = 1e-14 * (1.0 + std::abs(cur.E));
    Field trial = phi;
    std::optional<Reduced::Eval> next;
    for (int halving = 0; halving < 60; ++halving) {
      trial = phi;
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += alpha * dir[i];
      auto e = reduced.evaluate(trial);
      if (std::isfinite(e.E) && e.E <= cur.E + opts.armijo * alpha * slope + slack) {
        next = std::move(e);
        break;
      }
      alpha *= 0.5;
    }
    if (!next) break;

    // Barzilai-Borwein step measured in the A metric.
    const Field s = trial - phi;
    const Field y = next->gradient - cur.gradient;
    const double sy = inner(s, y);
    const double sAs = inner(s, apply_A(s));
    alpha = sy > 0.0 ? std::clamp(sAs / sy, 1e-8, 1e8) : std::min(2.0 * alpha, 1e8);

    phi = std::move(trial);
    cur = std::move(*next);
    trace.push_back(cur.E);
  }

  StationaryPoint out = finish(phi, cur.sigma, M, params);
  out.iterations = it;
  out.converged = converged;
  out.energy_trace = std::move(trace);
  return out;
}

std::vector<StationaryPoint> constant_states(const Grid& grid, double M, const ModelParams& params,
                                             const ConstantStateOptions& opts) {
  if (!(opts.upper > opts.lower) || opts.subintervals < 1) {
    throw std::invalid_argument("constant state bracket must be a nonempty interval");
  }
  const double cp = params.chi_phi, cs = params.chi_sigma;
  // With d = M - c and mu0 = chi_sigma d + chi_phi (1 - c):
  const auto f = [&](double c) { return psi_prime(params.psi, c) - (cp + cs) * (M - c) - cp * (1.0 - c); };

  std::vector<double> roots;
  const double h = (opts.upper - opts.lower) / opts.subintervals;
  double x0 = opts.lower, f0 = f(x0);
  if (f0 == 0.0) roots.push_back(x0);
  for (int i = 1; i <= opts.subintervals; ++i) {
    const double x1 = opts.lower + h * i, f1 = f(x1);
    if (f1 == 0.0) {
      roots.push_back(x1);
    } else if (f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi);
    }
    x0 = x1;
    f0 = f1;
  }

  std::vector<StationaryPoint> out;
  for (double c : roots) {
    StationaryPoint p = finish(Field(grid, c), Field(grid, M - c), M, params);
    p.converged = true;
    p.energy_trace = {p.E_value};
    out.push_back(std::move(p));
  }
  return out;
}

BoundednessReport boundedness_probe(const Grid& grid, double M, const ModelParams& params, std::size_t count,
                                    std::uint64_t seed, double amplitude, const MinimizeOptions& opts) {
  BoundednessReport rep;
  for (std::size_t k = 0; k < count; ++k) {
    InitialDataSpec spec;
    spec.generator = InitialGenerator::Random;
    spec.phi_mean = M / 2.0;
    spec.sigma_mean = M / 2.0;
    spec.phi_amplitude = amplitude;
    spec.sigma_amplitude = amplitude;
    spec.seed = seed + k;
    const StationaryPoint p = minimize_energy(make_initial_state(grid, spec), M, params, opts);
    ++rep.runs;
    if (!p.converged) continue;
    ++rep.converged;
    const double v = norms(p.phi_star).h1 + l2_norm(p.sigma_star);
    rep.finite = rep.finite && std::isfinite(v);
    rep.norms.push_back(v);
    rep.bound = std::max(rep.bound, v);
  }
  return rep;
}

CoercivityWitness coercivity_witness(const State& state, const ModelParams& params, double t_max, int samples) {
  if (samples < 2 || !(t_max > 1.0)) throw std::invalid_argument("coercivity witness needs t_max > 1 and 2+ samples");
  const double vol = state.phi.grid.volume();
  const double cp2 = params.chi_phi * params.chi_phi / params.chi_sigma;
  const double gap = params.psi.R1 - 2.0 * cp2;
  // Psi >= R1 s^2 - R2 and Young's inequality on the cross term give
  // E >= 1/2 |grad phi|^2 + (R1 - chi_phi^2 / chi_sigma) |phi|^2 - K.
  const double K = (params.psi.R2 + cp2) * vol;
  const double grad2 = 2.0 * energy(State(0.0, state.phi, Field(state.phi.grid)), params).gradient_term;
  const double phi2 = inner(state.phi, state.phi);

  CoercivityWitness w;
  w.quadratic_coefficient = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double t = 1.0 + (t_max - 1.0) * i / (samples - 1);
    const double E = energy(State(0.0, t * state.phi, t * state.sigma), params).E;
    const double lb = t * t * (0.5 * grad2 + gap * phi2) - K;
    w.scales.push_back(t);
    w.energies.push_back(E);
    w.lower_bounds.push_back(lb);
    w.bound_holds = w.bound_holds && E >= lb;
    if (t >= 4.0) w.quadratic_coefficient = std::min(w.quadratic_coefficient, (E + K) / (t * t));
  }
  return w;
}

void write_stationary_csv(std::ostream& out, const std::vector<StationaryPoint>& points, const ModelParams& params,
                          std::uint64_t seed) {
  out << "# seed=" << seed << "\n";
  out << "M,chi_phi,chi_sigma,mu0,E_value,r1,r2,r3,iterations,converged\n";
  for (const auto& p : points) {
    out << format_double(p.M) << ',' << format_double(params.chi_phi) << ',' << format_double(params.chi_sigma)
        << ',' << format_double(p.mu0) << ',' << format_double(p.E_value) << ',' << format_double(p.residuals.r1)
        << ',' << format_double(p.residuals.r2) << ',' << format_double(p.residuals.r3) << ',' << p.iterations
        << ',' << (p.converged ? 1 : 0) << "\n";
  }
}

}  // namespace tumorlab
