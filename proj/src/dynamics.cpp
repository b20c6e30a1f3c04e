#include "tumorlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "tumorlab/energy_csv.hpp"
#include "tumorlab/format.hpp"

namespace tumorlab {

std::vector<LyapunovViolation> lyapunov_audit(const std::vector<StepRecord>& records) {
  std::vector<LyapunovViolation> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double prev = records[i - 1].report.E, cur = records[i].report.E;
    if (cur > prev + energy_tolerance(prev)) out.push_back({i, records[i].t, prev, cur});
  }
  return out;
}

std::vector<LyapunovViolation> lyapunov_audit(std::istream& energy_csv) {
  return lyapunov_audit(read_energy_csv(energy_csv));
}

OmegaLimitReport omega_limit_probe(const State& initial, const ModelParams& params, const OmegaOptions& opts,
                                   const std::vector<StationaryPoint>& extra_known) {
  if (!(opts.T > 0.0)) throw std::invalid_argument("omega-limit horizon must be positive");
  OmegaLimitReport rep;
  const Grid& grid = initial.phi.grid;
  rep.M = (integral(initial.phi) + integral(initial.sigma)) / grid.volume();

  // Velocities come from the last step of (nearly) full length; a short
  // closing step would amplify rounding in the difference quotient.
  std::optional<StepRecord> last_full, last_any;
  RunObserver obs;
  obs.on_record = [&](const State&, const StepRecord& rec) {
    if (rec.t == initial.t) return;
    last_any = rec;
    if (rec.report.dt_used >= 0.5 * opts.dt) last_full = rec;
  };
  RunOptions ro;
  ro.dt = opts.dt;
  ro.scheme = opts.scheme;
  const RunSummary sum = run(initial, params, opts.T, ro, obs);

  const StepRecord& v = last_full ? *last_full : *last_any;
  rep.velocity_phi = v.h1dual_phit;
  rep.velocity_sigma = v.h1dual_sigmat;
  rep.steps = sum.steps;
  rep.energy_plateau = sum.final_report.E;
  rep.final_state = sum.final_state;
  rep.residuals = stationary_residual(sum.final_state.phi, sum.final_state.sigma, rep.M, params);
  rep.converged = rep.velocity_phi < opts.velocity_tol && rep.velocity_sigma < opts.velocity_tol;

  rep.known_points = constant_states(grid, rep.M, params);
  rep.known_points.insert(rep.known_points.end(), extra_known.begin(), extra_known.end());
  rep.distance_to_known = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.known_points.size(); ++k) {
    const auto& p = rep.known_points[k];
    const double dp = l2_norm(sum.final_state.phi - p.phi_star);
    const double ds = l2_norm(sum.final_state.sigma - p.sigma_star);
    const double d = std::sqrt(dp * dp + ds * ds);
    if (d < rep.distance_to_known) {
      rep.distance_to_known = d;
      rep.nearest = k;
    }
  }
  return rep;
}

Field smooth_direction(const Grid& grid) {
  const auto order = mode_order(grid);
  ModeRep rep(grid);
  const std::size_t last = std::min<std::size_t>(4, order.size() - 1);
  for (std::size_t j = 1; j <= last; ++j) rep.coefficients[order[j]] = 1.0 / static_cast<double>(j);
  Field w = from_modes(rep);
  w *= 1.0 / l2_norm(w);
  return w;
}

namespace {

double dual_distance(const State& a, const State& b) {
  return norms(a.phi - b.phi).h1_dual + norms(a.sigma - b.sigma).h1_dual;
}

// Fixed-step unguarded integration up to `target`.
void advance_to(State& s, const ModelParams& params, double target, double dt, const SchemeOptions& scheme) {
  while (target - s.t > 1e-12 * std::max(1.0, std::abs(target))) {
    const double h = std::min(dt, target - s.t);
    s = advance(s, params, h, scheme);
  }
  s.t = target;
}

}  // namespace

DependenceReport continuous_dependence_experiment(const State& base, const ModelParams& params,
                                                  const DependenceOptions& opts) {
  if (!params.mobility_m.is_unit() || !params.mobility_n.is_unit()) {
    throw std::invalid_argument("continuous dependence needs unit mobilities");
  }
  if (params.p.mode != ProliferationMode::P2) {
    throw std::invalid_argument("continuous dependence needs proliferation mode P2");
  }
  if (!(opts.epsilon >= 0.0) || !(opts.dt > 0.0)) throw std::invalid_argument("need epsilon >= 0 and dt > 0");
  if (!std::is_sorted(opts.times.begin(), opts.times.end())) throw std::invalid_argument("times must be increasing");

  const Field w = opts.direction ? *opts.direction : smooth_direction(base.phi.grid);
  State s0 = base, s1 = base, s2 = base;
  s1.phi += opts.epsilon * w;
  s2.phi += 0.5 * opts.epsilon * w;

  DependenceReport rep;
  rep.epsilon = opts.epsilon;
  rep.times = opts.times;
  rep.d0_full = dual_distance(s1, s0);
  rep.d0_half = dual_distance(s2, s0);

  SchemeOptions scheme;
  scheme.energy_guard = false;
  for (double t : opts.times) {
    const double target = base.t + t;
    advance_to(s0, params, target, opts.dt, scheme);
    advance_to(s1, params, target, opts.dt, scheme);
    advance_to(s2, params, target, opts.dt, scheme);
    const double df = dual_distance(s1, s0), dh = dual_distance(s2, s0);
    rep.d_full.push_back(df);
    rep.d_half.push_back(dh);
    rep.ratios.push_back(dh > 0.0 ? df / dh : std::numeric_limits<double>::quiet_NaN());
    rep.growth.push_back(rep.d0_full > 0.0 ? df / rep.d0_full : std::numeric_limits<double>::quiet_NaN());
  }
  return rep;
}

RegularityReport regularity_probe(const std::vector<State>& snapshots, const RegularityOptions& opts) {
  RegularityReport rep;
  std::vector<double> window;
  for (const State& s : snapshots) {
    const double h3 = sobolev_norm(to_modes(s.phi), 3.0);
    const double h1 = norms(s.sigma).h1;
    rep.times.push_back(s.t);
    rep.h3_phi.push_back(h3);
    rep.h1_sigma.push_back(h1);
    rep.finite = rep.finite && std::isfinite(h3) && std::isfinite(h1);
    if (s.t >= opts.t_from) {
      window.push_back(h3);
      rep.sup_h3_phi = std::max(rep.sup_h3_phi, h3);
      rep.sup_h1_sigma = std::max(rep.sup_h1_sigma, h1);
    }
  }
  if (!window.empty()) {
    auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    const double median = *mid;
    rep.max_over_median = median > 0.0 ? rep.sup_h3_phi / median : (rep.sup_h3_phi > 0.0 ? INFINITY : 1.0);
  }
  rep.flagged = !rep.finite || rep.max_over_median > opts.sanity_bound;
  return rep;
}

std::vector<ModelParams> sweep_parameter_sets(const ModelParams& base) {
  std::vector<ModelParams> out;
  const double pairs[4][2] = {{1.0, 0.5}, {2.0, 0.5}, {1.0, 0.1}, {2.0, 1.0}};
  for (double cp : {0.0, 0.5, 1.0}) {
    for (const auto& pr : pairs) {
      ModelParams p = base;
      p.chi_phi = cp;
      p.chi_sigma = pr[0];
      p.p.p0 = pr[1];
      out.push_back(p);
    }
  }
  return out;
}

std::vector<SweepEntry> lyapunov_sweep(const ModelParams& base, const SweepOptions& opts) {
  if (opts.lengths.size() != opts.resolution.size()) throw std::invalid_argument("sweep grid shape mismatch");
  const Grid grid = Grid::build(static_cast<int>(opts.lengths.size()), opts.lengths, opts.resolution);
  RunOptions ro;
  ro.dt = opts.dt;
  std::vector<SweepEntry> out;
  for (const ModelParams& p : sweep_parameter_sets(base)) {
    for (std::uint64_t seed : opts.seeds) {
      InitialDataSpec spec = opts.initial;
      spec.seed = seed;
      const State init = make_initial_state(grid, spec);
      const RunSummary sum = run(init, p, opts.T, ro);
      SweepEntry e;
      e.chi_phi = p.chi_phi;
      e.chi_sigma = p.chi_sigma;
      e.p0 = p.p.p0;
      e.seed = seed;
      e.steps = sum.steps;
      e.violations = sum.monotonicity_violations;
      e.mass_drift = sum.mass_drift;
      e.E_initial = energy(init, p).E;
      e.E_final = sum.final_report.E;
      out.push_back(e);
    }
  }
  return out;
}

void write_dependence_csv(std::ostream& out, const DependenceReport& rep, std::uint64_t seed) {
  out << "# seed=" << seed << " epsilon=" << format_double(rep.epsilon) << "\n";
  out << "t,d_eps,d_half,ratio,growth\n";
  out << "0," << format_double(rep.d0_full) << ',' << format_double(rep.d0_half) << ','
      << format_double(rep.d0_half > 0.0 ? rep.d0_full / rep.d0_half : NAN) << ",1\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << format_double(rep.times[i]) << ',' << format_double(rep.d_full[i]) << ',' << format_double(rep.d_half[i])
        << ',' << format_double(rep.ratios[i]) << ',' << format_double(rep.growth[i]) << "\n";
  }
}

void write_omega_summary(std::ostream& out, const OmegaLimitReport& rep) {
  out << "M = " << format_double(rep.M) << "\n";
  out << "velocity_phi = " << format_double(rep.velocity_phi) << "\n";
  out << "velocity_sigma = " << format_double(rep.velocity_sigma) << "\n";
  out << "distance_to_known_stationary_points = " << format_double(rep.distance_to_known) << "\n";
  out << "energy_plateau = " << format_double(rep.energy_plateau) << "\n";
  out << "r1 = " << format_double(rep.residuals.r1) << "\n";
  out << "r2 = " << format_double(rep.residuals.r2) << "\n";
  out << "r3 = " << format_double(rep.residuals.r3) << "\n";
  out << "steps = " << rep.steps << "\n";
  out << "converged = " << (rep.converged ? "true" : "false") << "\n";
}

void write_regularity_csv(std::ostream& out, const RegularityReport& rep, std::uint64_t seed) {
  out << "# seed=" << seed << "\nt,h3_phi,h1_sigma\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    out << format_double(rep.times[i]) << ',' << format_double(rep.h3_phi[i]) << ','
        << format_double(rep.h1_sigma[i]) << "\n";
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& entries) {
  out << "chi_phi,chi_sigma,p0,seed,steps,violations,mass_drift,E_initial,E_final\n";
  for (const auto& e : entries) {
    out << format_double(e.chi_phi) << ',' << format_double(e.chi_sigma) << ',' << format_double(e.p0) << ','
        << e.seed << ',' << e.steps << ',' << e.violations << ',' << format_double(e.mass_drift) << ','
        << format_double(e.E_initial) << ',' << format_double(e.E_final) << "\n";
  }
}

}  // namespace tumorlab
