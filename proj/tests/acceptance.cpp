// Acceptance checks. Prints one PASS/FAIL line per criterion with its
// runtime and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tumorlab/config.hpp"
#include "tumorlab/dynamics.hpp"
#include "tumorlab/energy_csv.hpp"
#include "tumorlab/format.hpp"
#include "tumorlab/galerkin.hpp"
#include "tumorlab/initial_data.hpp"
#include "tumorlab/semigroup.hpp"
#include "tumorlab/solver.hpp"
#include "tumorlab/spectral.hpp"
#include "tumorlab/stationary.hpp"

using namespace tumorlab;
using std::numbers::pi;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

Grid line(double L, int n) {
  const double len[] = {L};
  const int res[] = {n};
  return Grid::build(1, len, res);
}

std::string fmt(double v) { return format_double(v); }

Outcome energy_dissipation() {
  const RunConfig cfg = parse_config("");
  std::stringstream csv;
  write_energy_csv_header(csv, cfg.initial.seed);
  RunObserver obs;
  obs.on_record = [&](const State&, const StepRecord& r) { write_energy_csv_row(csv, r); };
  RunOptions opts;
  opts.dt = cfg.time.dt;
  opts.scheme = cfg.time.scheme();
  const auto sum = run(make_initial_state(cfg.grid.build(), cfg.initial), cfg.model, cfg.time.T, opts, obs);
  const auto violations = lyapunov_audit(csv);
  return {violations.empty() && sum.monotonicity_violations == 0,
          std::to_string(violations.size()) + " violations over " + std::to_string(sum.steps) + " steps"};
}

Outcome energy_identity_order() {
  const ModelParams params;
  InitialDataSpec spec;
  spec.generator = InitialGenerator::Cosine;
  spec.count = 3;
  spec.phi_amplitude = 0.3;
  spec.sigma_mean = 0.2;
  const State s0 = make_initial_state(line(2.0 * pi, 128), spec);
  SchemeOptions opts;
  opts.energy_guard = false;
  std::vector<double> residuals;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    const State s1 = advance(s0, params, dt, opts);
    const auto e0 = energy(s0, params), e1 = energy(s1, params);
    residuals.push_back(std::abs((e1.E - e0.E) / dt + e1.dissipation()));
  }
  bool ok = true;
  std::string detail = "factors";
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    const double f = residuals[i - 1] / residuals[i];
    ok &= f >= 1.5 && f <= 2.5;
    detail += " " + fmt(f);
  }
  return {ok, detail};
}

Outcome mass_conservation() {
  const RunConfig cfg = parse_config("");
  const Grid g = cfg.grid.build();
  RunOptions opts;
  opts.dt = cfg.time.dt;
  opts.scheme = cfg.time.scheme();
  const auto sum = run(make_initial_state(g, cfg.initial), cfg.model, 1e4 * opts.dt, opts);
  const double drift = std::abs(sum.mass_drift);
  return {sum.steps >= 10000 && drift <= 1e-10 * g.volume(),
          "drift " + fmt(drift) + " after " + std::to_string(sum.steps) + " steps"};
}

Outcome galerkin_crossval() {
  const ModelParams params;
  const Grid g = line(1.0, 32);
  Field phi(g), sigma(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(0, g.unflatten(i)[0]);
    phi[i] = 0.05 * (std::cos(2 * pi * x) + 0.5 * std::cos(3 * pi * x));
    sigma[i] = 0.1 + 0.025 * std::cos(2 * pi * x);
  }
  const auto rep = cross_validate(State(0.0, phi, sigma), params, 16, 0.1, 0.01, 1e-5);
  return {rep.final_gap <= 1e-6, "L2 gap " + fmt(rep.final_gap) + " at t = " + fmt(rep.times.back())};
}

Outcome constant_state_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid g = line(1.0, 8);
  double worst = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    ModelParams params;
    params.chi_phi = 0.5 + 0.5 * u(rng);
    params.chi_sigma = 1.0 + 2.0 * u(rng);
    params.p.p0 = 0.2 + 0.8 * u(rng);
    const double c = 1.6 * u(rng) - 0.8, d = u(rng) - 0.5;
    RunOptions opts;
    opts.dt = 1e-3;
    const auto sum = run(State(0.0, Field(g, c), Field(g, d)), params, 1.0, opts);
    const auto ref = oracle::constant_state(params, c, d, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(sum.final_state.phi[i] - ref[0]));
      worst = std::max(worst, std::abs(sum.final_state.sigma[i] - ref[1]));
    }
  }
  return {worst <= 1e-8, "max deviation " + fmt(worst)};
}

Outcome stationary_problem() {
  const RunConfig cfg = parse_config("[grid]\ndims = 1\nlengths = 10\nresolution = 64\n");
  const Grid g = cfg.grid.build();
  const double M = 0.3;
  std::size_t converged = 0;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    InitialDataSpec spec;
    spec.phi_amplitude = 0.5;
    spec.sigma_amplitude = 0.5;
    spec.seed = seed;
    const auto p = minimize_energy(project_Z_M(make_initial_state(g, spec), M), M, cfg.model);
    if (!p.converged) continue;
    ++converged;
    r1 = std::max(r1, p.residuals.r1);
    r2 = std::max(r2, p.residuals.r2);
    r3 = std::max(r3, p.residuals.r3);
  }
  const bool residuals_ok = converged > 0 && r1 <= 1e-8 && r2 <= 1e-8 && r3 <= 1e-10 * g.volume();

  ModelParams zero;
  zero.chi_phi = 0.0;
  zero.chi_sigma = 0.5;
  const auto roots = constant_states(g, 0.0, zero);
  // With chi_phi = 0 and M = 0 the constant states solve Psi'(c) + chi_sigma c = 0.
  const auto reduced = [&](double c) { return psi_eval(zero.psi, c).dpsi + zero.chi_sigma * c; };
  const auto bisect = [&](double a, double b) {
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      (reduced(a) * reduced(m) <= 0 ? b : a) = m;
    }
    return 0.5 * (a + b);
  };
  const std::vector<double> expected = {bisect(-1.0, -0.5), 0.0, bisect(0.5, 1.0)};
  bool roots_ok = roots.size() == 3;
  double root_err = 0.0;
  for (std::size_t i = 0; roots_ok && i < 3; ++i) {
    root_err = std::max(root_err, std::abs(roots[i].phi_star[0] - expected[i]));
    root_err = std::max(root_err, std::abs(expected[i] - (i == 1 ? 0.0 : (i == 0 ? -1 : 1) * std::sqrt(0.5))));
  }
  roots_ok = roots_ok && root_err <= 1e-10;
  return {residuals_ok && roots_ok, std::to_string(converged) + "/10 converged, r1 " + fmt(r1) + ", r2 " + fmt(r2) +
                                        ", r3 " + fmt(r3) + "; " + std::to_string(roots.size()) +
                                        " constant roots, error " + fmt(root_err)};
}

Outcome linear_semigroup() {
  CertificateOptions opts;
  opts.parameter_sets = 100;
  const auto rep = stability_certificate(opts);
  const bool ok = rep.unstable_blocks == 0 && rep.decay_violations == 0 && std::isfinite(rep.max_smoothing_constant) &&
                  rep.min_slope >= -1.0 && rep.max_slope <= -0.25;
  return {ok, std::to_string(rep.unstable_blocks) + " unstable of " + std::to_string(rep.blocks) +
                  " blocks, max ratio " + fmt(rep.max_decay_ratio) + ", slopes [" + fmt(rep.min_slope) + ", " +
                  fmt(rep.max_slope) + "]"};
}

Outcome continuous_dependence() {
  const RunConfig cfg = parse_config("");
  const auto rep =
      continuous_dependence_experiment(make_initial_state(cfg.grid.build(), cfg.initial), cfg.model, {});
  bool ok = rep.ratios.size() == 3;
  std::string detail = "ratios";
  for (double r : rep.ratios) {
    ok &= r >= 1.8 && r <= 2.2;
    detail += " " + fmt(r);
  }
  return {ok, detail};
}

Outcome omega_limit() {
  const RunConfig cfg = parse_config(
      "[grid]\ndims = 1\nlengths = 1\nresolution = 64\n[model]\nchi_phi = 0\nchi_sigma = 2\n"
      "[initial]\nphi_amplitude = 0.05\nsigma_mean = 0\nseed = 7\n");
  OmegaOptions opts;
  opts.T = 200.0;
  const auto rep = omega_limit_probe(make_initial_state(cfg.grid.build(), cfg.initial), cfg.model, opts);
  const double velocity = rep.velocity_phi + rep.velocity_sigma;
  const double residual = std::max({rep.residuals.r1, rep.residuals.r2, rep.residuals.r3});
  return {velocity < 1e-6 && residual <= 1e-5,
          "velocity " + fmt(velocity) + ", residual " + fmt(residual) + ", distance to known " +
              fmt(rep.distance_to_known)};
}

Outcome spectral_identities() {
  const double l1[] = {1.5}, l2[] = {1.5, 2.0}, l3[] = {1.5, 2.0, 0.8};
  const int r1[] = {64}, r2[] = {16, 12}, r3[] = {6, 8, 5};
  const std::vector<Grid> grids = {Grid::build(1, l1, r1), Grid::build(2, l2, r2), Grid::build(3, l3, r3)};
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double duality = 0.0, roundtrip = 0.0, parseval = 0.0, ordering = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Grid& g = grids[n % 3];
    Field a(g), b(g);
    for (auto& v : a.values) v = u(rng);
    for (auto& v : b.values) v = u(rng);
    duality = std::max(duality, std::abs(inner(apply_A(a), apply_A_inv(b)) - inner(b, a)));
    const Field back = from_modes(to_modes(a));
    for (std::size_t i = 0; i < g.size(); ++i) roundtrip = std::max(roundtrip, std::abs(back[i] - a[i]));
    double coeff2 = 0.0;
    for (double c : to_modes(a).coefficients) coeff2 += c * c;
    const double nrm = l2_norm(a);
    parseval = std::max(parseval, std::abs(coeff2 - nrm * nrm));
    const auto r = norms(a);
    ordering = std::max({ordering, r.h1_dual - r.l2, r.l2 - r.h1});
  }
  const double worst = std::max({duality, roundtrip, parseval});
  return {worst <= 1e-10 && ordering <= 1e-10,
          "duality " + fmt(duality) + ", roundtrip " + fmt(roundtrip) + ", Parseval " + fmt(parseval) +
              ", ordering excess " + fmt(ordering)};
}

struct Criterion {
  std::string name;
  double time_limit;  // seconds, 0 when unbounded
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"energy_dissipation", 60, energy_dissipation},
      {"energy_identity_order", 30, energy_identity_order},
      {"mass_conservation", 60, mass_conservation},
      {"galerkin_crossval", 30, galerkin_crossval},
      {"constant_state_oracle", 0, constant_state_oracle},
      {"stationary_problem", 0, stationary_problem},
      {"linear_semigroup", 10, linear_semigroup},
      {"continuous_dependence", 120, continuous_dependence},
      {"omega_limit", 120, omega_limit},
      {"spectral_identities", 5, spectral_identities},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit <= 0 || secs <= c.time_limit;
    const bool ok = out.ok && in_time;
    failures += ok ? 0 : 1;
    char timing[64];
    if (c.time_limit > 0) {
      std::snprintf(timing, sizeof timing, "%.2f s (limit %.0f s)", secs, c.time_limit);
    } else {
      std::snprintf(timing, sizeof timing, "%.2f s", secs);
    }
    std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": " << out.detail << "; " << timing << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
