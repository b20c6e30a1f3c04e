// Command-line front end: tumorlab <command> --config <path> [--out <dir>] [--seed <u64>]

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "tumorlab/config.hpp"
#include "tumorlab/dynamics.hpp"
#include "tumorlab/energy_csv.hpp"
#include "tumorlab/format.hpp"
#include "tumorlab/galerkin.hpp"
#include "tumorlab/render.hpp"
#include "tumorlab/semigroup.hpp"
#include "tumorlab/snapshot.hpp"
#include "tumorlab/stationary.hpp"

namespace fs = std::filesystem;
using namespace tumorlab;

namespace {

constexpr int kExitCheckFailed = 3;

struct Context {
  RunConfig cfg;
  fs::path out;
  std::uint64_t seed = 1;
};

std::ofstream open_out(const Context& ctx, const std::string& name) {
  std::ofstream f(ctx.out / name);
  if (!f) throw std::runtime_error("cannot write " + (ctx.out / name).string());
  return f;
}

// One human-readable verdict line per check; returns whether it passed.
bool report_check(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  return ok;
}

State initial_state(const Context& ctx) {
  return make_initial_state(ctx.cfg.grid.build(), ctx.cfg.initial);
}

int cmd_simulate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const State init = initial_state(ctx);
  auto energy_csv = open_out(ctx, "energy.csv");
  write_energy_csv_header(energy_csv, ctx.seed);

  std::vector<State> snapshots;
  RunObserver obs;
  obs.on_record = [&](const State&, const StepRecord& rec) { write_energy_csv_row(energy_csv, rec); };
  obs.on_snapshot = [&](const State& s, std::size_t step) {
    snapshots.push_back(s);
    if (cfg.output.snapshots) {
      char name[64];
      std::snprintf(name, sizeof(name), "phi_%08zu.snap", step);
      write_snapshot(ctx.out / name, s.phi);
      std::snprintf(name, sizeof(name), "sigma_%08zu.snap", step);
      write_snapshot(ctx.out / name, s.sigma);
    }
  };
  RunOptions ro;
  ro.dt = cfg.time.dt;
  ro.scheme = cfg.time.scheme();
  ro.snapshot_every = cfg.time.snapshot_every;
  const RunSummary sum = run(init, cfg.model, cfg.time.T, ro, obs);
  energy_csv.close();

  write_snapshot(ctx.out / "phi_final.snap", sum.final_state.phi);
  write_snapshot(ctx.out / "sigma_final.snap", sum.final_state.sigma);
  if (cfg.output.field_csv) {
    write_field_csv(ctx.out / "phi_final.csv", sum.final_state.phi);
    write_field_csv(ctx.out / "sigma_final.csv", sum.final_state.sigma);
  }
  if (cfg.output.png && cfg.grid.dims == 2) {
    render_heatmap(sum.final_state.phi, ctx.out / "phi_final.png");
    render_heatmap(sum.final_state.sigma, ctx.out / "sigma_final.png");
  }
  if (!snapshots.empty()) {
    RegularityOptions ropts;
    ropts.t_from = cfg.experiment.regularity_from;
    ropts.sanity_bound = cfg.experiment.sanity_bound;
    auto reg = open_out(ctx, "regularity.csv");
    write_regularity_csv(reg, regularity_probe(snapshots, ropts), ctx.seed);
  }

  const double vol = init.phi.grid.volume();
  auto s = open_out(ctx, "summary.txt");
  s << "steps = " << sum.steps << "\nE_final = " << format_double(sum.final_report.E)
    << "\nmonotonicity_violations = " << sum.monotonicity_violations
    << "\nmass_drift = " << format_double(sum.mass_drift) << "\nphi_min = " << format_double(sum.phi_min)
    << "\nphi_max = " << format_double(sum.phi_max) << "\n";

  bool ok = true;
  if (cfg.time.guard) {
    ok &= report_check("energy_monotone", sum.monotonicity_violations == 0,
                       std::to_string(sum.monotonicity_violations) + " violations in " + std::to_string(sum.steps) +
                           " steps");
  }
  ok &= report_check("mass_conserved", std::abs(sum.mass_drift) <= 1e-10 * vol,
                     "drift " + format_double(sum.mass_drift));
  return ok ? 0 : kExitCheckFailed;
}

int cmd_galerkin(const Context& ctx) {
  const auto& g = ctx.cfg.galerkin;
  GalerkinOptions opts;
  opts.rtol = g.rtol;
  opts.atol = g.atol;
  opts.padding = g.padding;
  const auto traj = integrate_galerkin(project_initial(initial_state(ctx), g.modes), ctx.cfg.model, g.T,
                                       g.sample_dt, opts);
  auto coeff = open_out(ctx, "galerkin_coefficients.csv");
  write_coefficients_csv(coeff, traj, ctx.seed);
  auto en = open_out(ctx, "galerkin_energy.csv");
  en << "# seed=" << ctx.seed << "\nt,E,dissipated,D_mu,D_N,D_exchange\n";
  for (const auto& s : traj.samples) {
    en << format_double(s.t) << ',' << format_double(s.report.E) << ',' << format_double(s.dissipated) << ','
       << format_double(s.report.D_mu) << ',' << format_double(s.report.D_N) << ','
       << format_double(s.report.D_exchange) << "\n";
  }
  std::cout << "steps = " << traj.steps << ", rejected = " << traj.rejected
            << ", identity_defect = " << format_double(traj.identity_defect) << "\n";
  return 0;
}

int cmd_stationary(const Context& ctx) {
  const auto& st = ctx.cfg.stationary;
  const Grid grid = ctx.cfg.grid.build();
  MinimizeOptions mopts;
  mopts.tol = st.tol;
  mopts.max_iterations = st.max_iterations;

  std::vector<StationaryPoint> points = constant_states(grid, st.M, ctx.cfg.model);
  const StationaryPoint min = minimize_energy(project_Z_M(initial_state(ctx), st.M), st.M, ctx.cfg.model, mopts);
  points.push_back(min);
  auto csv = open_out(ctx, "stationary.csv");
  write_stationary_csv(csv, points, ctx.cfg.model, ctx.seed);
  write_snapshot(ctx.out / "phi_star.snap", min.phi_star);
  write_snapshot(ctx.out / "sigma_star.snap", min.sigma_star);

  bool ok = true;
  if (st.starts > 0) {
    const auto b = boundedness_probe(grid, st.M, ctx.cfg.model, st.starts, ctx.seed, st.amplitude, mopts);
    ok &= report_check("bounded_minimisers", b.finite && b.converged == b.runs,
                       std::to_string(b.converged) + "/" + std::to_string(b.runs) + " converged, bound " +
                           format_double(b.bound));
  }
  const double vol = grid.volume();
  ok &= report_check("minimiser_residuals",
                     min.converged && min.residuals.r1 <= 1e-8 && min.residuals.r2 <= 1e-8 &&
                         min.residuals.r3 <= 1e-10 * vol,
                     "r1 " + format_double(min.residuals.r1) + ", r2 " + format_double(min.residuals.r2) + ", r3 " +
                         format_double(min.residuals.r3) + ", iterations " + std::to_string(min.iterations));
  return ok ? 0 : kExitCheckFailed;
}

int cmd_semigroup(const Context& ctx) {
  DecayOptions opts;
  opts.t_samples = ctx.cfg.experiment.decay_times;
  opts.random_vectors = ctx.cfg.experiment.decay_vectors;
  opts.seed = ctx.seed;
  const auto rep = decay_constants(ctx.cfg.model, ctx.cfg.model.psi.R1, ctx.cfg.grid.build(), opts);
  auto csv = open_out(ctx, "decay.csv");
  write_decay_csv(csv, rep, ctx.seed);
  auto sum = open_out(ctx, "decay_summary.txt");
  write_decay_summary(sum, rep);
  bool ok = report_check("decay_bound", rep.violations.empty(),
                         "max ratio " + format_double(rep.max_decay_ratio) + " (limit 2)");
  ok &= report_check("smoothing_finite", std::isfinite(rep.smoothing_constant),
                     "constant " + format_double(rep.smoothing_constant) + ", slope " +
                         format_double(rep.smoothing_slope));
  return ok ? 0 : kExitCheckFailed;
}

int cmd_crossval(const Context& ctx) {
  const auto& g = ctx.cfg.galerkin;
  GalerkinOptions opts;
  opts.rtol = g.rtol;
  opts.atol = g.atol;
  opts.padding = g.padding;
  const auto rep = cross_validate(initial_state(ctx), ctx.cfg.model, g.modes, g.T, g.sample_dt, g.crossval_dt, opts);
  auto csv = open_out(ctx, "crossval.csv");
  write_crossval_csv(csv, rep, ctx.seed);
  return report_check("crossval", rep.final_gap <= 1e-6,
                      "L2 gap " + format_double(rep.final_gap) + " at t = " + format_double(rep.times.back()) +
                          " (threshold 1e-6)")
             ? 0
             : kExitCheckFailed;
}

int cmd_dependence(const Context& ctx) {
  const auto& e = ctx.cfg.experiment;
  DependenceOptions opts;
  opts.epsilon = e.epsilon;
  opts.times = e.dependence_times;
  opts.dt = e.dependence_dt;
  const auto rep = continuous_dependence_experiment(initial_state(ctx), ctx.cfg.model, opts);
  auto csv = open_out(ctx, "dependence.csv");
  write_dependence_csv(csv, rep, ctx.seed);
  bool ok = true;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    ok &= report_check("ratio_t=" + format_double(rep.times[i]), rep.ratios[i] >= 1.8 && rep.ratios[i] <= 2.2,
                       "d_eps/d_half " + format_double(rep.ratios[i]) + ", growth " + format_double(rep.growth[i]));
  }
  return ok ? 0 : kExitCheckFailed;
}

int cmd_omega(const Context& ctx) {
  const auto& e = ctx.cfg.experiment;
  OmegaOptions opts;
  opts.T = e.omega_T;
  opts.dt = e.omega_dt;
  opts.velocity_tol = e.velocity_tol;
  opts.scheme = ctx.cfg.time.scheme();
  const auto rep = omega_limit_probe(initial_state(ctx), ctx.cfg.model, opts);
  auto sum = open_out(ctx, "omega_summary.txt");
  write_omega_summary(sum, rep);
  write_snapshot(ctx.out / "phi_final.snap", rep.final_state->phi);
  write_snapshot(ctx.out / "sigma_final.snap", rep.final_state->sigma);
  return report_check("omega_limit", rep.converged,
                      "velocities " + format_double(rep.velocity_phi) + ", " + format_double(rep.velocity_sigma) +
                          "; residual r1 " + format_double(rep.residuals.r1))
             ? 0
             : kExitCheckFailed;
}

int cmd_sweep(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  SweepOptions opts;
  opts.lengths = cfg.grid.lengths;
  opts.resolution = cfg.grid.resolution;
  opts.T = cfg.experiment.sweep_T;
  opts.dt = cfg.time.dt;
  opts.seeds = cfg.experiment.sweep_seeds;
  opts.initial = cfg.initial;
  const auto entries = lyapunov_sweep(cfg.model, opts);
  auto csv = open_out(ctx, "sweep.csv");
  write_sweep_csv(csv, entries);
  std::size_t violations = 0;
  for (const auto& e : entries) violations += e.violations;
  return report_check("sweep_monotone", violations == 0,
                      std::to_string(violations) + " violations over " + std::to_string(entries.size()) + " runs")
             ? 0
             : kExitCheckFailed;
}

int cmd_render(const Context& ctx, const std::string& input) {
  if (input.empty()) throw std::invalid_argument("render needs --input <snapshot>");
  const Field f = read_snapshot(input);
  const fs::path png = ctx.out / (fs::path(input).stem().string() + ".png");
  render_heatmap(f, png);
  std::cout << "wrote " << png.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field tumour growth laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir, input;
  std::optional<std::uint64_t> seed;

  const char* commands[][2] = {
      {"simulate", "time-stepped run with energy CSV and snapshots"},
      {"galerkin", "modal Galerkin trajectory"},
      {"stationary", "stationary states on the mass level set"},
      {"semigroup", "decay and smoothing constants of the linearised flow"},
      {"crossval", "Galerkin versus IMEX solver at matched truncation"},
      {"dependence", "perturbation growth from nearby initial data"},
      {"omega", "long run towards a stationary point"},
      {"sweep", "Lyapunov audit over the parameter matrix"},
      {"render", "PNG heatmap of a 2D snapshot"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "run configuration file");
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "random seed (overrides [initial] seed)");
    if (std::string(c[0]) == "render") sub->add_option("--input", input, "snapshot to render")->required();
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Context ctx;
    if (!config_path.empty()) {
      ctx.cfg = load_config(config_path);
    } else if (command != "render") {
      throw std::invalid_argument(command + " needs --config <path>");
    } else {
      ctx.cfg = parse_config("");
    }
    if (seed) ctx.cfg.initial.seed = *seed;
    ctx.seed = ctx.cfg.initial.seed;
    ctx.out = out_dir.empty() ? fs::path(ctx.cfg.output.directory) : fs::path(out_dir);
    fs::create_directories(ctx.out);
    if (command != "render") open_out(ctx, "config.ini") << serialize_config(ctx.cfg);

    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "galerkin") return cmd_galerkin(ctx);
    if (command == "stationary") return cmd_stationary(ctx);
    if (command == "semigroup") return cmd_semigroup(ctx);
    if (command == "crossval") return cmd_crossval(ctx);
    if (command == "dependence") return cmd_dependence(ctx);
    if (command == "omega") return cmd_omega(ctx);
    if (command == "sweep") return cmd_sweep(ctx);
    return cmd_render(ctx, input);
  } catch (const std::exception& e) {
    nlohmann::json failure{{"status", "error"}, {"command", command}, {"message", e.what()}};
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
      failure["kind"] = "config";
      failure["line"] = ce->line();
      failure["field"] = ce->field();
    } else if (const auto* sr = dynamic_cast<const StepRejected*>(&e)) {
      failure["kind"] = "step-rejected";
      failure["dt_used"] = sr->last_report.dt_used;
    } else if (const auto* gs = dynamic_cast<const GalerkinStiffness*>(&e)) {
      failure["kind"] = "galerkin-stiffness";
      failure["mode"] = gs->mode_index;
    } else {
      failure["kind"] = "runtime";
    }
    std::cerr << failure.dump() << "\n";
    return 2;
  }
}
