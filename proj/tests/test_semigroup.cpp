#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tumorlab/semigroup.hpp"

using namespace tumorlab;

namespace {

Grid line(double L, int n) {
  const double len[] = {L};
  const int res[] = {n};
  return Grid::build(1, len, res);
}

// Classical RK4 on the block with a fine fixed step.
Vec2 rk4_reference(const ModeBlock& b, Vec2 z, double T, int steps) {
  const auto& m = b.matrix;
  const auto f = [&](const Vec2& v) { return Vec2{m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]}; };
  const double h = T / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec2 k1 = f(z);
    const Vec2 k2 = f({z[0] + 0.5 * h * k1[0], z[1] + 0.5 * h * k1[1]});
    const Vec2 k3 = f({z[0] + 0.5 * h * k2[0], z[1] + 0.5 * h * k2[1]});
    const Vec2 k4 = f({z[0] + h * k3[0], z[1] + h * k3[1]});
    for (int c = 0; c < 2; ++c) z[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return z;
}

}  // namespace

TEST_CASE("mode block") {
  ModelParams params;  // chi_phi = chi_sigma = 1
  const ModeBlock b = mode_block(1.0, params, 2.5);
  CHECK(b.matrix[0] == -3.5);
  CHECK(b.matrix[1] == 1.0);
  CHECK(b.matrix[2] == b.matrix[1]);
  CHECK(b.matrix[3] == -1.0);
  CHECK(b.eigenvalues[0] == doctest::Approx((-4.5 - std::sqrt(10.25)) / 2).epsilon(1e-14));
  CHECK(b.eigenvalues[1] == doctest::Approx((-4.5 + std::sqrt(10.25)) / 2).epsilon(1e-14));
  CHECK(b.spectral_abscissa == b.eigenvalues[1]);

  params.chi_phi = 0.0;
  params.chi_sigma = 3.0;
  const ModeBlock d = mode_block(4.0, params, 2.0);
  CHECK(d.eigenvalues[0] == -24.0);
  CHECK(d.eigenvalues[1] == -12.0);

  CHECK_THROWS_AS(mode_block(0.5, params, 2.0), std::invalid_argument);
}

TEST_CASE("mode evolution") {
  ModelParams params;
  params.chi_phi = 0.7;
  params.chi_sigma = 1.3;
  const ModeBlock b = mode_block(2.2, params, 1.5);

  SUBCASE("identity at t = 0") {
    const Vec2 z = evolve_mode(b, {0.3, -1.2}, 0.0);
    CHECK(z[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(z[1] == doctest::Approx(-1.2).epsilon(1e-15));
  }
  SUBCASE("matches a fine RK4 integration") {
    const Vec2 z0{0.8, -0.5};
    const Vec2 exact = evolve_mode(b, z0, 1.0);
    const Vec2 ref = rk4_reference(b, z0, 1.0, 20000);
    CHECK(std::abs(exact[0] - ref[0]) < 1e-10);
    CHECK(std::abs(exact[1] - ref[1]) < 1e-10);
  }
  SUBCASE("decoupled exponential") {
    ModelParams p0;
    p0.chi_phi = 0.0;
    const ModeBlock d = mode_block(3.0, p0, 2.0);
    for (double t : {0.01, 0.1, 1.0}) {
      const Vec2 z = evolve_mode(d, {1.0, 0.0}, t);
      CHECK(z[0] == doctest::Approx(std::exp(-15.0 * t)).epsilon(1e-13));
      CHECK(z[1] == 0.0);
    }
  }
  SUBCASE("norm is nonincreasing") {
    double prev = std::hypot(1.0, 1.0);
    for (double t : {0.1, 1.0, 10.0}) {
      const Vec2 z = evolve_mode(b, {1.0, 1.0}, t);
      const double n = std::hypot(z[0], z[1]);
      CHECK(n <= prev);
      prev = n;
    }
  }
  SUBCASE("large eigenvalues stay finite") {
    const ModeBlock big = mode_block(1e4, params, 1.5);
    const Vec2 z = evolve_mode(big, {1.0, 1.0}, 10.0);
    CHECK(std::isfinite(z[0]));
    CHECK(std::isfinite(z[1]));
    CHECK(std::isfinite(smoothing_gain(big, 1e-4)));
  }
  CHECK_THROWS_AS(evolve_mode(b, {1.0, 0.0}, -1.0), std::invalid_argument);
}

TEST_CASE("decay constants") {
  const Grid g = line(1.0, 64);
  SUBCASE("coupled example: slowest mode is the constant one") {
    const ModelParams params;
    const auto rep = decay_constants(params, 2.5, g);
    CHECK(rep.n_modes == 64);
    CHECK(rep.slowest_mode == 0);
    CHECK(rep.omega1 == doctest::Approx((4.5 - std::sqrt(10.25)) / 2).epsilon(1e-13));
    CHECK(rep.omega2 == doctest::Approx(rep.omega1 / 2));
    CHECK(rep.violations.empty());
    CHECK(rep.max_decay_ratio <= 2.0);
    for (double a : rep.abscissae) CHECK(rep.omega1 <= -a);
    CHECK(std::isfinite(rep.smoothing_constant));
    CHECK(rep.smoothing_constant > 0.0);
    CHECK(rep.smoothing_slope > -1.0);
    CHECK(rep.smoothing_slope < -0.25);
  }
  SUBCASE("decoupled rate") {
    ModelParams params;
    params.chi_phi = 0.0;
    params.chi_sigma = 0.8;
    CHECK(decay_constants(params, 2.0, g).omega1 == doctest::Approx(0.8).epsilon(1e-14));
    params.chi_sigma = 5.0;
    CHECK(decay_constants(params, 2.0, g).omega1 == doctest::Approx(3.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(decay_constants(ModelParams{}, 2.5, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("stability certificate") {
  CertificateOptions opts;
  opts.parameter_sets = 20;
  opts.decay.random_vectors = 20;
  const auto rep = stability_certificate(opts);
  CHECK(rep.parameter_sets == 20);
  CHECK(rep.blocks == 20 * 200);
  CHECK(rep.unstable_blocks == 0);
  CHECK(rep.max_abscissa < 0.0);
  CHECK(rep.decay_violations == 0);
  CHECK(std::isfinite(rep.max_smoothing_constant));
  CHECK(rep.min_slope > -1.0);
  CHECK(rep.max_slope < -0.25);
}

TEST_CASE("decay report output") {
  const auto rep = decay_constants(ModelParams{}, 2.5, line(1.0, 4));
  std::ostringstream csv, summary;
  write_decay_csv(csv, rep, 3);
  write_decay_summary(summary, rep);
  CHECK(csv.str().rfind("# seed=3\nlambda,abscissa,slowest\n1,", 0) == 0);
  CHECK(csv.str().find(",1\n") != std::string::npos);
  CHECK(summary.str().find("omega1 = ") == 0);
  CHECK(summary.str().find("smoothing_constant = ") != std::string::npos);
}
