#include "tumorlab/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "tumorlab/format.hpp"

namespace tumorlab {

namespace {

// Right-hand side machinery bound to one mode set and one quadrature grid.
class System {
 public:
  System(const Grid& grid, const std::vector<std::size_t>& modes, const ModelParams& params, int padding)
      : params_(params), quad_(grid.refined(std::max(1, padding))), sqrt_vol_(std::sqrt(grid.volume())) {
    if (modes.empty() || modes.front() != 0) throw std::invalid_argument("galerkin modes must start at the constant");
    quad_index_.reserve(modes.size());
    ell_.reserve(modes.size());
    for (std::size_t m : modes) {
      quad_index_.push_back(quad_.flatten(grid.unflatten(m)));
      ell_.push_back(grid.laplacian_eigenvalue(m));
    }
  }

  std::size_t n() const { return ell_.size(); }

  Field expand(const double* c) const {
    ModeRep rep(quad_);
    for (std::size_t j = 0; j < n(); ++j) rep.coefficients[quad_index_[j]] = c[j];
    return from_modes(rep);
  }

  void project(const Field& f, double* out) const {
    const ModeRep rep = to_modes(f);
    for (std::size_t j = 0; j < n(); ++j) out[j] = rep.coefficients[quad_index_[j]];
  }

  struct Dissipation {
    double mu = 0.0;
    double nutrient = 0.0;
    double exchange = 0.0;
  };

  // Writes a' and b' and returns the three dissipation channels.
  Dissipation eval(const double* a, const double* b, double* da, double* db) const {
    const std::size_t n = this->n();
    const double chi_phi = params_.chi_phi, chi_sigma = params_.chi_sigma;
    const Field phi = expand(a);
    const Field sigma = expand(b);

    Field dpsi(quad_);
    for (std::size_t i = 0; i < dpsi.size(); ++i) dpsi[i] = psi_prime(params_.psi, phi[i]);
    std::vector<double> g(n), c(n), nh(n), x(n, 0.0);
    project(dpsi, g.data());
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = ell_[j] * a[j] + g[j] - chi_phi * b[j];
      nh[j] = chi_sigma * b[j] - chi_phi * a[j];
    }
    // N = chi_sigma sigma + chi_phi (1 - phi); the constant 1 is sqrt|Omega| w_0.
    nh[0] += chi_phi * sqrt_vol_;

    Dissipation d;
    const Field mu = expand(c.data());
    const bool exchange = !(params_.p.family == ProliferationFamily::Constant && params_.p.p0 == 0.0);
    if (exchange) {
      Field source(quad_);
      double ex = 0.0;
      for (std::size_t i = 0; i < source.size(); ++i) {
        const double gap = chi_sigma * sigma[i] + chi_phi * (1.0 - phi[i]) - mu[i];
        const double p = p_eval(params_.p, phi[i]).p;
        source[i] = p * gap;
        ex += p * gap * gap;
      }
      d.exchange = ex * quad_.cell_volume();
      project(source, x.data());
    }

    if (params_.mobility_m.is_unit()) {
      for (std::size_t j = 0; j < n; ++j) {
        da[j] = -ell_[j] * c[j] + x[j];
        d.mu += ell_[j] * c[j] * c[j];
      }
    } else {
      d.mu = weighted_flux(mu, phi, params_.mobility_m, da);
      for (std::size_t j = 0; j < n; ++j) da[j] += x[j];
    }
    if (params_.mobility_n.is_unit()) {
      for (std::size_t j = 0; j < n; ++j) {
        db[j] = -ell_[j] * nh[j] - x[j];
        d.nutrient += ell_[j] * nh[j] * nh[j];
      }
    } else {
      d.nutrient = weighted_flux(expand(nh.data()), phi, params_.mobility_n, db);
      for (std::size_t j = 0; j < n; ++j) db[j] -= x[j];
    }
    return d;
  }

  EnergyReport report(const double* a, const double* b) const {
    EnergyReport r;
    const Field phi = expand(a);
    double pot = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) pot += psi_eval(params_.psi, phi[i]).psi;
    double ab = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < n(); ++j) {
      r.gradient_term += 0.5 * ell_[j] * a[j] * a[j];
      ab += a[j] * b[j];
      bb += b[j] * b[j];
    }
    r.potential_term = pot * quad_.cell_volume();
    r.sigma_term = 0.5 * params_.chi_sigma * bb;
    r.cross_term = params_.chi_phi * (sqrt_vol_ * b[0] - ab);
    r.E = r.gradient_term + r.potential_term + r.sigma_term + r.cross_term;
    std::vector<double> da(n()), db(n());
    const Dissipation d = eval(a, b, da.data(), db.data());
    r.D_mu = d.mu;
    r.D_N = d.nutrient;
    r.D_exchange = d.exchange;
    r.mass = sqrt_vol_ * (a[0] + b[0]);
    return r;
  }

 private:
  // Projection of div(w(phi) grad u) onto the modes; returns int w |grad u|^2.
  double weighted_flux(const Field& u, const Field& phi, const MobilitySpec& w, double* out) const {
    auto grad = gradient(u);
    double acc = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double m = mobility_eval(w, phi[i]);
      for (Field& gcomp : grad) {
        acc += m * gcomp[i] * gcomp[i];
        gcomp[i] *= m;
      }
    }
    project(divergence(grad), out);
    return acc * quad_.cell_volume();
  }

  ModelParams params_;
  Grid quad_;
  double sqrt_vol_;
  std::vector<std::size_t> quad_index_;
  std::vector<double> ell_;
};

System make_system(const GalerkinState& gs, const ModelParams& params, const GalerkinOptions& opts) {
  if (gs.modes.size() != gs.a.size() || gs.b.size() != gs.a.size()) {
    throw std::invalid_argument("galerkin state vectors have inconsistent lengths");
  }
  return System(gs.grid, gs.modes, params, opts.padding);
}

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kE[7] = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace

GalerkinState project_initial(const State& state, std::size_t n) {
  const Grid& grid = state.phi.grid;
  if (n == 0 || n > grid.size()) {
    throw std::invalid_argument("galerkin truncation n = " + std::to_string(n) + " outside [1, " +
                                std::to_string(grid.size()) + "]");
  }
  auto order = mode_order(grid);
  order.resize(n);
  const ModeRep pa = to_modes(state.phi);
  const ModeRep pb = to_modes(state.sigma);
  GalerkinState gs{grid, order, std::vector<double>(n), std::vector<double>(n), state.t};
  for (std::size_t j = 0; j < n; ++j) {
    gs.a[j] = pa.coefficients[order[j]];
    gs.b[j] = pb.coefficients[order[j]];
  }
  return gs;
}

State galerkin_to_state(const GalerkinState& gs) {
  ModeRep ra(gs.grid), rb(gs.grid);
  for (std::size_t j = 0; j < gs.n(); ++j) {
    ra.coefficients[gs.modes[j]] = gs.a[j];
    rb.coefficients[gs.modes[j]] = gs.b[j];
  }
  return State(gs.t, from_modes(ra), from_modes(rb));
}

GalerkinDerivative galerkin_rhs(const GalerkinState& gs, const ModelParams& params, const GalerkinOptions& opts) {
  const System sys = make_system(gs, params, opts);
  GalerkinDerivative d{std::vector<double>(gs.n()), std::vector<double>(gs.n())};
  sys.eval(gs.a.data(), gs.b.data(), d.da.data(), d.db.data());
  return d;
}

EnergyReport galerkin_energy(const GalerkinState& gs, const ModelParams& params, const GalerkinOptions& opts) {
  return make_system(gs, params, opts).report(gs.a.data(), gs.b.data());
}

GalerkinTrajectory integrate_galerkin(const GalerkinState& gs, const ModelParams& params, double T, double dt,
                                      const GalerkinOptions& opts) {
  if (T < 0.0) throw std::invalid_argument("galerkin horizon must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("galerkin sample interval must be positive");
  const System sys = make_system(gs, params, opts);
  const std::size_t n = gs.n();
  // Unknowns: a (n), b (n), and the accumulated dissipation.
  const std::size_t dim = 2 * n + 1;

  const auto rhs = [&](const std::vector<double>& y, std::vector<double>& f) {
    const auto d = sys.eval(y.data(), y.data() + n, f.data(), f.data() + n);
    f[2 * n] = d.mu + d.nutrient + d.exchange;
  };

  std::vector<double> y(dim, 0.0);
  std::copy(gs.a.begin(), gs.a.end(), y.begin());
  std::copy(gs.b.begin(), gs.b.end(), y.begin() + n);

  GalerkinTrajectory traj{{}, gs};
  const double E0 = sys.report(y.data(), y.data() + n).E;
  const auto record = [&](double t) {
    GalerkinSample s;
    s.t = t;
    s.a.assign(y.begin(), y.begin() + n);
    s.b.assign(y.begin() + n, y.begin() + 2 * n);
    s.report = sys.report(s.a.data(), s.b.data());
    s.dissipated = y[2 * n];
    traj.identity_defect = std::max(traj.identity_defect, std::abs(s.report.E + s.dissipated - E0));
    traj.samples.push_back(std::move(s));
  };

  double t = gs.t;
  const double t_end = gs.t + T;
  record(t);

  std::vector<std::vector<double>> k(7, std::vector<double>(dim));
  std::vector<double> stage(dim), y_new(dim), err(dim);
  rhs(y, k[0]);

  const auto scaled_norm = [&](const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = opts.atol + opts.rtol * std::abs(y[i]);
      acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / dim);
  };
  double h;
  {
    const double d0 = scaled_norm(y), d1 = scaled_norm(k[0]);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, dt);
  }

  const double time_eps = 1e-12 * std::max(1.0, std::abs(t_end));
  std::size_t sample_index = 1;
  double err_prev = 1e-4;
  bool last_rejected = false;
  while (t_end - t > time_eps) {
    const double next_sample = std::min(t_end, gs.t + static_cast<double>(sample_index) * dt);
    double h_try = std::min(h, next_sample - t);
    const bool hits_sample = h_try >= next_sample - t - time_eps;

    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = y[i];
        for (int r = 0; r < s; ++r) acc += h_try * kA[s][r] * k[r][i];
        stage[i] = acc;
      }
      rhs(stage, k[s]);
    }
    // Stage 7 is evaluated at the fifth-order solution itself.
    y_new = stage;
    for (std::size_t i = 0; i < dim; ++i) {
      double e = 0.0;
      for (int r = 0; r < 7; ++r) e += kE[r] * k[r][i];
      err[i] = h_try * e;
    }
    double en = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      en += (err[i] / sc) * (err[i] / sc);
    }
    en = std::sqrt(en / dim);
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      t = hits_sample ? next_sample : t + h_try;
      y.swap(y_new);
      std::swap(k[0], k[6]);
      ++traj.steps;
      // PI controller.
      double fac = 0.9 * std::pow(en, -0.14) * std::pow(err_prev, 0.08);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      err_prev = std::max(en, 1e-4);
      last_rejected = false;
      // A step shortened only to land on a sample time keeps the old size.
      h = (hits_sample && h_try < h) ? h : h_try * fac;
      if (hits_sample) {
        record(t);
        ++sample_index;
      }
    } else {
      ++traj.rejected;
      last_rejected = true;
      h = h_try * std::max(0.2, 0.9 * std::pow(en, -0.2));
    }

    if (h < opts.min_step || traj.steps + traj.rejected > opts.max_steps) {
      std::size_t worst = 0;
      double worst_val = -1.0;
      for (std::size_t i = 0; i < 2 * n; ++i) {
        const double sc = opts.atol + opts.rtol * std::abs(y[i]);
        if (std::abs(err[i]) / sc > worst_val) {
          worst_val = std::abs(err[i]) / sc;
          worst = i % n;
        }
      }
      throw GalerkinStiffness("galerkin integration stalled at t = " + std::to_string(t) + " (step " +
                                  std::to_string(h) + "), dominated by mode " + std::to_string(worst),
                              worst);
    }
  }

  traj.final_state.t = t;
  traj.final_state.a.assign(y.begin(), y.begin() + n);
  traj.final_state.b.assign(y.begin() + n, y.begin() + 2 * n);
  return traj;
}

void write_coefficients_csv(std::ostream& out, const GalerkinTrajectory& traj, std::uint64_t seed) {
  const std::size_t n = traj.final_state.n();
  out << "# seed=" << seed << "\n" << "t";
  for (std::size_t j = 1; j <= n; ++j) out << ",a_" << j;
  for (std::size_t j = 1; j <= n; ++j) out << ",b_" << j;
  out << "\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t);
    for (double v : s.a) out << ',' << format_double(v);
    for (double v : s.b) out << ',' << format_double(v);
    out << "\n";
  }
}

CrossvalReport cross_validate(const State& initial, const ModelParams& params, std::size_t n, double T,
                              double sample_dt, double solver_dt, const GalerkinOptions& opts) {
  const GalerkinTrajectory traj = integrate_galerkin(project_initial(initial, n), params, T, sample_dt, opts);
  CrossvalReport rep;
  rep.galerkin_steps = traj.steps;

  RunOptions ro;
  ro.dt = solver_dt;
  ro.scheme.mode_cutoff = n;
  State imex(initial.t, truncate_modes(initial.phi, n), truncate_modes(initial.sigma, n));
  GalerkinState probe = traj.final_state;
  for (const auto& sample : traj.samples) {
    if (sample.t > imex.t) {
      const RunSummary seg = run(imex, params, sample.t - imex.t, ro);
      rep.solver_steps += seg.steps;
      imex = seg.final_state;
    }
    probe.a = sample.a;
    probe.b = sample.b;
    const State gal = galerkin_to_state(probe);
    const double dp = l2_norm(gal.phi - imex.phi), ds = l2_norm(gal.sigma - imex.sigma);
    const double gap = std::sqrt(dp * dp + ds * ds);
    rep.times.push_back(sample.t);
    rep.gaps.push_back(gap);
    rep.max_gap = std::max(rep.max_gap, gap);
  }
  rep.final_gap = rep.gaps.back();
  return rep;
}

void write_crossval_csv(std::ostream& out, const CrossvalReport& rep, std::uint64_t seed) {
  out << "# seed=" << seed << "\nt,l2_gap\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << format_double(rep.times[i]) << ',' << format_double(rep.gaps[i]) << "\n";
  }
}

}  // namespace tumorlab
