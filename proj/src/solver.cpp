#include "tumorlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tumorlab {

State::State(double time, Field p, Field s) : t(time), phi(std::move(p)), sigma(std::move(s)) {
  if (phi.grid != sigma.grid) throw std::invalid_argument("phi and sigma must share a grid");
}

namespace {

Field map_field(const Field& f, const auto& fn) {
  Field out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = fn(f[i]);
  return out;
}

// int w |grad u|^2 for a weight given pointwise by weight(phi).
double weighted_gradient_energy(const Field& u, const Field& phi, const MobilitySpec& mobility) {
  if (mobility.is_unit()) {
    const ModeRep rep = to_modes(u);
    double acc = 0.0;
    for (std::size_t k = 0; k < rep.coefficients.size(); ++k) {
      acc += rep.grid.laplacian_eigenvalue(k) * rep.coefficients[k] * rep.coefficients[k];
    }
    return acc;
  }
  const auto grad = gradient(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double g2 = 0.0;
    for (const Field& g : grad) g2 += g[i] * g[i];
    acc += mobility_eval(mobility, phi[i]) * g2;
  }
  return acc * u.grid.cell_volume();
}

// -Lap eigenvalues for every flat mode index, built axis by axis.
std::vector<double> laplacian_table(const Grid& grid) {
  std::vector<double> ell(grid.size(), 0.0);
  std::size_t stride = 1;
  for (int ax = grid.dims() - 1; ax >= 0; --ax) {
    const auto n = static_cast<std::size_t>(grid.resolution(ax));
    for (std::size_t base = 0; base < ell.size(); base += stride * n) {
      for (std::size_t j = 0; j < n; ++j) {
        const double kap = grid.wavenumber(ax, static_cast<int>(j));
        for (std::size_t i = 0; i < stride; ++i) ell[base + j * stride + i] += kap * kap;
      }
    }
    stride *= n;
  }
  return ell;
}

double default_stabilization(const Field& phi, const PotentialSpec& psi) {
  const auto [lo, hi] = std::minmax_element(phi.values.begin(), phi.values.end());
  const double a = *lo - 1.0, b = *hi + 1.0;
  constexpr int kSamples = 200;
  double best = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    best = std::max(best, psi_eval(psi, a + (b - a) * i / kSamples).d2psi);
  }
  return best;
}

// Pointwise exchange  c' = p(c) (N - mu),  d' = -c'  with the Laplacian part
// of mu frozen at the start of the step. The same increment is added to phi
// and removed from sigma, so phi + sigma is unchanged at every node.
void exchange_stage(Field& phi, Field& sigma, const ModelParams& params, double dt, int substeps) {
  const ProliferationSpec& p = params.p;
  if (p.family == ProliferationFamily::Constant && p.p0 == 0.0) return;
  const Field lphi = apply_neg_laplacian(phi);
  const double h = dt / substeps;
  const double chi_phi = params.chi_phi, chi_sigma = params.chi_sigma;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double c0 = phi[i], d0 = sigma[i], l = lphi[i];
    const auto rate = [&](double y) {
      const double c = c0 + y, d = d0 - y;
      const double mu = l + psi_prime(params.psi, c) - chi_phi * d;
      const double n = chi_sigma * d + chi_phi * (1.0 - c);
      return p_eval(p, c).p * (n - mu);
    };
    double y = 0.0;
    for (int s = 0; s < substeps; ++s) {
      const double k1 = rate(y);
      const double k2 = rate(y + 0.5 * h * k1);
      const double k3 = rate(y + 0.5 * h * k2);
      const double k4 = rate(y + h * k3);
      y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    phi[i] += y;
    sigma[i] -= y;
  }
}

void truncate_rep(ModeRep& rep, std::size_t n) {
  if (n >= rep.coefficients.size()) return;
  const auto order = mode_order(rep.grid);
  for (std::size_t j = n; j < order.size(); ++j) rep.coefficients[order[j]] = 0.0;
}

std::vector<Field> scaled_gradient(const Field& u, const Field& phi, const MobilitySpec& mobility, double shift) {
  auto grad = gradient(u);
  for (Field& g : grad) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mobility_eval(mobility, phi[i]) - shift;
  }
  return grad;
}

}  // namespace

Field chemical_potential(const Field& phi, const Field& sigma, const ModelParams& params) {
  Field mu = apply_neg_laplacian(phi);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] += psi_prime(params.psi, phi[i]) - params.chi_phi * sigma[i];
  }
  return mu;
}

Field nutrient_potential(const Field& phi, const Field& sigma, const ModelParams& params) {
  Field n(phi.grid);
  for (std::size_t i = 0; i < n.size(); ++i) {
    n[i] = params.chi_sigma * sigma[i] + params.chi_phi * (1.0 - phi[i]);
  }
  return n;
}

EnergyReport energy(const State& state, const ModelParams& params) {
  const Field& phi = state.phi;
  const Field& sigma = state.sigma;
  const Grid& grid = phi.grid;
  const double dv = grid.cell_volume();
  const std::vector<double> ell = laplacian_table(grid);
  EnergyReport r;

  ModeRep a = to_modes(phi);
  const ModeRep b = to_modes(sigma);
  Field dpsi(grid);
  double pot = 0.0, sig = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const PsiValues v = psi_eval(params.psi, phi[i]);
    pot += v.psi;
    dpsi[i] = v.dpsi;
    sig += sigma[i] * sigma[i];
    cross += sigma[i] * (1.0 - phi[i]);
  }
  for (std::size_t k = 0; k < ell.size(); ++k) r.gradient_term += 0.5 * ell[k] * a.coefficients[k] * a.coefficients[k];
  r.potential_term = pot * dv;
  r.sigma_term = 0.5 * params.chi_sigma * sig * dv;
  r.cross_term = params.chi_phi * cross * dv;
  r.E = r.gradient_term + r.potential_term + r.sigma_term + r.cross_term;

  // mu and N in modes; the constant in N only touches the zero mode, where ell = 0.
  const ModeRep g = to_modes(dpsi);
  std::vector<double> mu_hat(ell.size()), n_hat(ell.size());
  for (std::size_t k = 0; k < ell.size(); ++k) {
    mu_hat[k] = ell[k] * a.coefficients[k] + g.coefficients[k] - params.chi_phi * b.coefficients[k];
    n_hat[k] = params.chi_sigma * b.coefficients[k] - params.chi_phi * a.coefficients[k];
  }
  const bool need_mu_field = !params.mobility_m.is_unit() || !params.mobility_n.is_unit() ||
                             !(params.p.family == ProliferationFamily::Constant && params.p.p0 == 0.0);
  Field mu(grid);
  if (need_mu_field) {
    for (std::size_t k = 0; k < ell.size(); ++k) a.coefficients[k] *= ell[k];
    mu = from_modes(a);
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] += dpsi[i] - params.chi_phi * sigma[i];
  }
  const Field n = nutrient_potential(phi, sigma, params);
  const auto mode_energy = [&](const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ell.size(); ++k) acc += ell[k] * c[k] * c[k];
    return acc;
  };
  r.D_mu = params.mobility_m.is_unit() ? mode_energy(mu_hat) : weighted_gradient_energy(mu, phi, params.mobility_m);
  r.D_N = params.mobility_n.is_unit() ? mode_energy(n_hat) : weighted_gradient_energy(n, phi, params.mobility_n);
  double ex = 0.0;
  if (need_mu_field) {
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double gap = n[i] - mu[i];
      ex += p_eval(params.p, phi[i]).p * gap * gap;
    }
  }
  r.D_exchange = ex * dv;
  r.mass = integral(phi) + integral(sigma);
  return r;
}

Field truncate_modes(const Field& field, std::size_t n) {
  ModeRep rep = to_modes(field);
  truncate_rep(rep, n);
  return from_modes(rep);
}

State advance(const State& state, const ModelParams& params, double dt, const SchemeOptions& opts) {
  const Grid& grid = state.phi.grid;
  const double S = opts.stabilization ? *opts.stabilization : default_stabilization(state.phi, params.psi);

  Field phi = state.phi;
  Field sigma = state.sigma;
  exchange_stage(phi, sigma, params, dt, std::max(1, opts.exchange_substeps));
  if (opts.mode_cutoff) {
    phi = truncate_modes(phi, *opts.mode_cutoff);
    sigma = truncate_modes(sigma, *opts.mode_cutoff);
  }

  // Cahn-Hilliard part: implicit biharmonic and stabilisation, explicit
  // Psi' and coupling. Variable mobility is split as m1 Lap + div((m - m1) grad).
  const double m1 = mobility_upper(params.mobility_m);
  Field explicit_part(grid);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    explicit_part[i] = psi_prime(params.psi, phi[i]) - params.chi_phi * sigma[i] - S * phi[i];
  }
  const ModeRep g_hat = to_modes(explicit_part);
  ModeRep a = to_modes(phi);
  std::vector<double> flux_hat(grid.size(), 0.0);
  if (!params.mobility_m.is_unit()) {
    const Field mu = chemical_potential(phi, sigma, params);
    const auto flux = scaled_gradient(mu, phi, params.mobility_m, m1);
    flux_hat = to_modes(divergence(flux)).coefficients;
  }
  const std::vector<double> ell_tab = laplacian_table(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double ell = ell_tab[k];
    const double rhs = a.coefficients[k] - dt * m1 * ell * g_hat.coefficients[k] + dt * flux_hat[k];
    a.coefficients[k] = rhs / (1.0 + dt * m1 * ell * (ell + S));
  }

  // Nutrient: implicit chi_sigma diffusion, cross-diffusion from the new phi.
  const double n1 = mobility_upper(params.mobility_n);
  ModeRep b = to_modes(sigma);
  std::vector<double> sflux_hat(grid.size(), 0.0);
  if (!params.mobility_n.is_unit()) {
    const Field n = nutrient_potential(phi, sigma, params);
    const auto flux = scaled_gradient(n, phi, params.mobility_n, n1);
    sflux_hat = to_modes(divergence(flux)).coefficients;
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double ell = ell_tab[k];
    const double rhs = b.coefficients[k] + dt * n1 * params.chi_phi * ell * a.coefficients[k] + dt * sflux_hat[k];
    b.coefficients[k] = rhs / (1.0 + dt * n1 * params.chi_sigma * ell);
  }

  if (opts.mode_cutoff) {
    truncate_rep(a, *opts.mode_cutoff);
    truncate_rep(b, *opts.mode_cutoff);
  }
  return State(state.t + dt, from_modes(a), from_modes(b));
}

StepResult step(const State& state, const ModelParams& params, double dt, const SchemeOptions& opts) {
  return step(state, energy(state, params).E, params, dt, opts);
}

StepResult step(const State& state, double E_old, const ModelParams& params, double dt, const SchemeOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  double dt_try = dt;
  EnergyReport last;
  for (int retries = 0;; ++retries) {
    State next = advance(state, params, dt_try, opts);
    const bool finite = next.phi.all_finite() && next.sigma.all_finite();
    if (finite) {
      last = energy(next, params);
      last.dt_used = dt_try;
      if (!opts.energy_guard || last.E <= E_old + energy_tolerance(E_old)) {
        return {std::move(next), last, retries};
      }
    } else {
      last.E = std::numeric_limits<double>::quiet_NaN();
      last.dt_used = dt_try;
      if (!opts.energy_guard) throw StepRejected("step produced non-finite values", last);
    }
    if (retries >= opts.max_retries) {
      throw StepRejected("step rejected after " + std::to_string(retries) + " dt halvings at t = " +
                             std::to_string(state.t),
                         last);
    }
    dt_try *= 0.5;
  }
}

StepRecord make_record(const State& state, const EnergyReport& report, const State* previous) {
  StepRecord rec;
  rec.t = state.t;
  rec.report = report;
  const auto [lo, hi] = std::minmax_element(state.phi.values.begin(), state.phi.values.end());
  rec.phi_min = *lo;
  rec.phi_max = *hi;
  rec.h1_phi = norms(state.phi).h1;
  rec.l2_sigma = l2_norm(state.sigma);
  if (previous != nullptr && state.t > previous->t) {
    const double inv_dt = 1.0 / (state.t - previous->t);
    rec.h1dual_phit = norms(inv_dt * (state.phi - previous->phi)).h1_dual;
    rec.h1dual_sigmat = norms(inv_dt * (state.sigma - previous->sigma)).h1_dual;
  }
  return rec;
}

RunSummary run(const State& initial, const ModelParams& params, double T, const RunOptions& opts,
               const RunObserver& observer) {
  if (T < 0.0) throw std::invalid_argument("run horizon must be nonnegative");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("time step must be positive");

  State current = initial;
  EnergyReport report = energy(current, params);
  RunSummary summary{current, report};
  summary.initial_mass = report.mass;
  const auto [lo, hi] = std::minmax_element(current.phi.values.begin(), current.phi.values.end());
  summary.phi_min = *lo;
  summary.phi_max = *hi;
  if (observer.on_record) observer.on_record(current, make_record(current, report, nullptr));
  if (observer.on_snapshot && opts.snapshot_every > 0) observer.on_snapshot(current, 0);

  const double t_end = initial.t + T;
  while (t_end - current.t > 1e-12 * std::max(1.0, std::abs(t_end))) {
    double dt = opts.dt;
    bool last_step = false;
    if (current.t + dt >= t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
      dt = t_end - current.t;
      last_step = true;
    }
    StepResult res = step(current, report.E, params, dt, opts.scheme);
    if (last_step && res.report.dt_used == dt) res.state.t = t_end;
    if (res.report.E > report.E + energy_tolerance(report.E)) ++summary.monotonicity_violations;

    const StepRecord rec = make_record(res.state, res.report, &current);
    summary.phi_min = std::min(summary.phi_min, rec.phi_min);
    summary.phi_max = std::max(summary.phi_max, rec.phi_max);
    ++summary.steps;
    current = std::move(res.state);
    report = res.report;
    if (observer.on_record) observer.on_record(current, rec);
    if (observer.on_snapshot && opts.snapshot_every > 0 && summary.steps % opts.snapshot_every == 0) {
      observer.on_snapshot(current, summary.steps);
    }
  }
  summary.final_state = current;
  summary.final_report = report;
  summary.mass_drift = report.mass - summary.initial_mass;
  return summary;
}

}  // namespace tumorlab
