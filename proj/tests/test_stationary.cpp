#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tumorlab/initial_data.hpp"
#include "tumorlab/stationary.hpp"

using namespace tumorlab;

namespace {

Grid line(double L, int n) {
  const double len[] = {L};
  const int res[] = {n};
  return Grid::build(1, len, res);
}

State random_state(const Grid& g, double amp, std::uint64_t seed) {
  InitialDataSpec spec;
  spec.phi_amplitude = amp;
  spec.sigma_mean = 0.0;
  spec.sigma_amplitude = amp;
  spec.seed = seed;
  return make_initial_state(g, spec);
}

void check_admissible(const StationaryPoint& p) {
  const double vol = p.phi_star.grid.volume();
  CHECK(p.converged);
  CHECK(p.residuals.r1 <= 1e-8);
  CHECK(p.residuals.r2 <= 1e-8);
  CHECK(p.residuals.r3 <= 1e-10 * vol);
}

}  // namespace

TEST_CASE("projection onto Z_M") {
  const Grid g = line(1.0, 16);
  const State s(0.0, Field(g, 1.0), Field(g, 0.0));
  const State p = project_Z_M(s, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(p.phi[i] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p.sigma[i] == doctest::Approx(-0.25).epsilon(1e-15));
  }
  const State r = random_state(line(3.0, 32), 0.4, 9);
  const State once = project_Z_M(r, -0.3);
  const State twice = project_Z_M(once, -0.3);
  CHECK((integral(once.phi) + integral(once.sigma)) == doctest::Approx(-0.9).epsilon(1e-13));
  CHECK(l2_norm(twice.phi - once.phi) < 1e-15);
  CHECK(l2_norm(twice.sigma - once.sigma) < 1e-15);
}

TEST_CASE("residuals") {
  const Grid g = line(1.0, 64);
  ModelParams params;
  params.chi_phi = 0.0;
  params.chi_sigma = 0.5;
  const double c = std::sqrt(0.5);

  SUBCASE("exact constant solution") {
    const auto r = stationary_residual(Field(g, c), Field(g, -c), 0.0, params);
    CHECK(r.r1 < 1e-12);
    CHECK(r.r2 < 1e-12);
    CHECK(r.r3 < 1e-12);
  }
  SUBCASE("linear growth under an eigenmode perturbation") {
    const std::size_t k = 3;
    const Field w = eigenmode(g, k);
    const double slope = g.laplacian_eigenvalue(k) + psi_eval(params.psi, c).d2psi;
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      const auto r = stationary_residual(Field(g, c) + eps * w, Field(g, -c), 0.0, params);
      CHECK(r.r1 / eps == doctest::Approx(slope).epsilon(1e-3));
    }
  }
  SUBCASE("wrong mass") {
    const auto r = stationary_residual(Field(g, c), Field(g, -c), 0.2, params);
    CHECK(r.r3 == doctest::Approx(0.2).epsilon(1e-13));
  }
}

TEST_CASE("constant stationary states") {
  const Grid g = line(1.0, 16);
  ModelParams params;
  params.chi_phi = 0.0;

  SUBCASE("chi_sigma = 1 has only the origin") {
    const auto pts = constant_states(g, 0.0, params);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].phi_star[0]) < 1e-12);
    CHECK(std::abs(pts[0].mu0) < 1e-12);
  }
  SUBCASE("chi_sigma = 0.5 gives three roots") {
    params.chi_sigma = 0.5;
    const auto pts = constant_states(g, 0.0, params);
    REQUIRE(pts.size() == 3);
    const double expected[] = {-std::sqrt(0.5), 0.0, std::sqrt(0.5)};
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(pts[i].phi_star[0] - expected[i]) < 1e-10);
      CHECK(pts[i].residuals.r1 < 1e-10);
      CHECK(pts[i].residuals.r2 < 1e-10);
      CHECK(pts[i].residuals.r3 < 1e-10);
    }
  }
  SUBCASE("coupled case is self-consistent") {
    params.chi_phi = 1.0;
    for (const auto& p : constant_states(g, 0.3, params)) {
      CHECK(p.residuals.r1 < 1e-10);
      CHECK(p.residuals.r2 < 1e-10);
      CHECK(p.residuals.r3 < 1e-10);
    }
  }
  SUBCASE("empty bracket") {
    ConstantStateOptions opts;
    opts.lower = 5.0;
    opts.upper = 6.0;
    CHECK(constant_states(g, 0.0, params, opts).empty());
  }
}

TEST_CASE("energy minimisation") {
  SUBCASE("uncoupled problem on the unit interval ends at the origin") {
    ModelParams params;
    params.chi_phi = 0.0;
    const Grid g = line(1.0, 64);
    const auto p = minimize_energy(random_state(g, 0.05, 3), 0.0, params);
    check_admissible(p);
    // Constants (c, -c) have E = 1/4 + c^4/4, minimal at c = 0.
    CHECK(p.E_value == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(mean_value(p.phi_star)) < 1e-2);
  }
  SUBCASE("phase-separated minimiser on a long interval") {
    const ModelParams params;
    const Grid g = line(10.0, 64);
    const auto p = minimize_energy(random_state(g, 0.3, 5), 0.3, params);
    check_admissible(p);
    const auto [lo, hi] = std::minmax_element(p.phi_star.values.begin(), p.phi_star.values.end());
    CHECK(*hi - *lo > 1.0);
    for (std::size_t i = 1; i < p.energy_trace.size(); ++i) {
      CHECK(p.energy_trace[i] <= p.energy_trace[i - 1] + 1e-14 * (1 + std::abs(p.energy_trace[i - 1])));
    }
    // sigma* is tied to phi* pointwise.
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double expected = (p.mu0 - params.chi_phi * (1.0 - p.phi_star[i])) / params.chi_sigma;
      CHECK(std::abs(p.sigma_star[i] - expected) < 1e-10);
    }
  }
  SUBCASE("a constant stationary start needs no iterations") {
    ModelParams params;
    params.chi_phi = 0.0;
    params.chi_sigma = 0.5;
    const Grid g = line(1.0, 32);
    const double c = std::sqrt(0.5);
    const auto p = minimize_energy(State(0.0, Field(g, c), Field(g, -c)), 0.0, params);
    CHECK(p.converged);
    CHECK(p.iterations == 0);
  }
  SUBCASE("iteration cap reports non-convergence") {
    const ModelParams params;
    MinimizeOptions opts;
    opts.max_iterations = 2;
    const auto p = minimize_energy(random_state(line(10.0, 64), 0.3, 5), 0.0, params, opts);
    CHECK_FALSE(p.converged);
    CHECK(p.iterations == 2);
  }
}

TEST_CASE("boundedness probe") {
  const ModelParams params;
  const auto rep = boundedness_probe(line(6.0, 32), 0.1, params, 20, 100);
  CHECK(rep.runs == 20);
  CHECK(rep.converged == 20);
  CHECK(rep.finite);
  CHECK(rep.bound > 0.0);
  CHECK(std::isfinite(rep.bound));
}

TEST_CASE("coercivity witness") {
  const ModelParams params;
  const auto w = coercivity_witness(random_state(line(2.0, 32), 0.5, 4), params);
  CHECK(w.bound_holds);
  CHECK(w.quadratic_coefficient > 0.0);
  CHECK(w.energies.back() > 16.0 * w.quadratic_coefficient);
}

TEST_CASE("stationary csv") {
  const Grid g = line(1.0, 8);
  ModelParams params;
  params.chi_phi = 0.0;
  std::ostringstream out;
  write_stationary_csv(out, constant_states(g, 0.0, params), params, 7);
  CHECK(out.str().rfind("# seed=7\nM,chi_phi,chi_sigma,mu0,E_value,r1,r2,r3,iterations,converged\n0,0,1,", 0) == 0);
}
