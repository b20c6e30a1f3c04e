#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "tumorlab/potentials.hpp"

using namespace tumorlab;

namespace {

// Closed forms of the default split, written out independently.
double psi0_exact(double s) { return 0.25 * (s * s - 1) * (s * s - 1) + s * s; }
double dpsi0_exact(double s) { return s * s * s - s + 2 * s; }
double d2psi0_exact(double s) { return 3 * s * s - 1 + 2; }

}  // namespace

TEST_CASE("quartic double well values") {
  const auto spec = quartic_double_well();
  struct Case {
    double s, psi, dpsi, d2psi;
  };
  for (const Case c : {Case{1, 0, 0, 2}, Case{0, 0.25, 0, -1}, Case{2, 2.25, 6, 11}, Case{-1, 0, 0, 2}}) {
    const auto v = psi_eval(spec, c.s);
    CHECK(v.psi == doctest::Approx(c.psi).epsilon(1e-14));
    CHECK(v.dpsi == doctest::Approx(c.dpsi).epsilon(1e-14));
    CHECK(v.d2psi == doctest::Approx(c.d2psi).epsilon(1e-14));
  }
}

TEST_CASE("psi splits into psi0 plus lambda") {
  const auto spec = quartic_double_well();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const double s = u(rng);
    const auto v = psi_eval(spec, s);
    const auto v0 = psi0_eval(spec, s);
    CHECK(v0.psi == doctest::Approx(psi0_exact(s)).epsilon(1e-12));
    CHECK(v0.dpsi == doctest::Approx(dpsi0_exact(s)).epsilon(1e-12));
    CHECK(v0.d2psi == doctest::Approx(d2psi0_exact(s)).epsilon(1e-12));
    CHECK(std::abs(v.psi - (v0.psi - s * s)) <= 1e-12 * (1 + std::abs(v.psi)));
    CHECK(psi_prime(spec, s) == doctest::Approx(v.dpsi).epsilon(1e-14));
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4, 4);
  const auto quartic = quartic_double_well();
  const auto truncated = truncate_potential(quartic, 2.0);
  ProliferationSpec bump;
  bump.family = ProliferationFamily::RationalBump;
  bump.delta = 0.01;
  bump.p0 = 1.0;

  // Error of a central difference is h^2/6 f''' at worst; both h values
  // must land inside that envelope.
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng);
    for (const auto* spec : {&quartic, &truncated}) {
      for (double h : {1e-3, 5e-4}) {
        const double fd1 = (psi_eval(*spec, s + h).psi - psi_eval(*spec, s - h).psi) / (2 * h);
        const double fd2 = (psi_eval(*spec, s + h).dpsi - psi_eval(*spec, s - h).dpsi) / (2 * h);
        CHECK(std::abs(fd1 - psi_eval(*spec, s).dpsi) <= 2.0 * h * h * (1 + std::abs(s)) + 1e-9);
        // Psi_m'' has a kink at the cutoff; skip stencils straddling it.
        if (spec == &truncated && std::abs(std::abs(s) - 2.0) < h) continue;
        CHECK(std::abs(fd2 - psi_eval(*spec, s).d2psi) <= 2.0 * h * h + 1e-8);
      }
    }
    const double h = 1e-4;
    const double fdp = (p_eval(bump, s + h).p - p_eval(bump, s - h).p) / (2 * h);
    CHECK(std::abs(fdp - p_eval(bump, s).dp) <= 1e-7);
  }
}

TEST_CASE("truncated potential") {
  const auto base = quartic_double_well();
  const auto t2 = truncate_potential(base, 2.0);

  SUBCASE("unchanged inside the cutoff") {
    const auto a = psi_eval(t2, 1.5), b = psi_eval(base, 1.5);
    CHECK(a.psi == b.psi);
    CHECK(a.dpsi == b.dpsi);
    CHECK(a.d2psi == b.d2psi);
  }
  SUBCASE("Taylor extension outside") {
    // psi0(2) = 6.25, psi0'(2) = 10, psi0''(2) = 13, lambda(3) = -9.
    const double expected = 6.25 + 10.0 + 0.5 * 13.0 - 9.0;
    CHECK(psi_eval(t2, 3.0).psi == doctest::Approx(expected).epsilon(1e-14));
    CHECK(psi_eval(t2, -3.0).psi == doctest::Approx(expected).epsilon(1e-14));
    CHECK(psi_eval(t2, 3.0).d2psi == doctest::Approx(13.0 - 2.0).epsilon(1e-14));
  }
  SUBCASE("pointwise convergence") {
    for (double m : {5.0, 6.0, 8.0, 100.0}) {
      CHECK(psi_eval(truncate_potential(base, m), 5.0).psi == psi_eval(base, 5.0).psi);
    }
  }
  SUBCASE("rejects small cutoffs and quadratic bases") {
    CHECK_THROWS_AS(truncate_potential(base, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(truncate_potential(base, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(truncate_potential(t2, 3.0), std::invalid_argument);
  }
  SUBCASE("quadratic growth, equi-coercivity, comparison") {
    double k4 = 0.0, k5 = 0.0;
    for (double m : {2.0, 4.0, 8.0}) {
      const auto tm = truncate_potential(base, m);
      double growth = 0.0;
      for (int i = 0; i <= 20000; ++i) {
        const double s = -100.0 + 0.01 * i;
        const auto v = psi_eval(tm, s);
        growth = std::max(growth, std::abs(v.psi) / (1 + s * s));
        k4 = std::max(k4, base.R1 * s * s - v.psi);
        k5 = std::max(k5, -v.d2psi);
        if (std::abs(s) >= m) {
          // Psi0''' > 0 for s > 0, so the Taylor tail sits below Psi.
          CHECK(v.psi <= psi_eval(base, s).psi + 1e-9);
          CHECK(std::abs(v.dpsi) <= std::abs(psi_eval(base, s).dpsi) + 1e-9);
        }
      }
      CHECK(growth < 1e3);
    }
    // One pair of constants serves every m.
    CHECK(k4 < 10.0);
    CHECK(k5 <= 1.0 + 1e-12);
  }
}

TEST_CASE("proliferation and mobility") {
  ProliferationSpec constant;
  CHECK(p_eval(constant, 3.7).p == 0.5);
  CHECK(p_eval(constant, 3.7).dp == 0.0);

  ProliferationSpec bump;
  bump.family = ProliferationFamily::RationalBump;
  bump.delta = 0.01;
  bump.p0 = 1.0;
  CHECK(p_eval(bump, 0.0).p == doctest::Approx(1.01));
  CHECK(p_eval(bump, 0.0).dp == 0.0);

  ProliferationSpec poly;
  poly.family = ProliferationFamily::Polynomial;
  poly.poly.coefficients = {0.0, 1.0};
  CHECK(p_eval(poly, -2.0).p == 0.0);
  CHECK(p_eval(poly, 2.0).p == 2.0);

  MobilitySpec unit;
  CHECK(mobility_eval(unit, -7.0) == 1.0);
  MobilitySpec bounded{MobilityFamily::Bounded, 0.5, 2.0};
  for (double s = -20; s <= 20; s += 0.25) {
    CHECK(mobility_eval(bounded, s) >= 0.5);
    CHECK(mobility_eval(bounded, s) <= 2.0);
  }
  CHECK(mobility_upper(bounded) == 2.0);
}

TEST_CASE("assumption validator") {
  ModelParams params;

  SUBCASE("default parameters pass with minimal R2 = 8.75") {
    const auto rep = validate_assumptions(params);
    CHECK(rep.all_passed());
    CHECK(rep.minimal_R2 == doctest::Approx(8.75).epsilon(1e-10));
    CHECK(rep.chemotaxis_gap == doctest::Approx(0.5));
  }
  SUBCASE("strong chemotaxis violates the gap") {
    params.chi_phi = 2.0;
    const auto rep = validate_assumptions(params);
    REQUIRE(rep.find("Psi.chemotaxis_gap") != nullptr);
    CHECK_FALSE(rep.find("Psi.chemotaxis_gap")->passed);
    CHECK(rep.chemotaxis_gap == doctest::Approx(2.5 - 8.0));
    CHECK_FALSE(rep.all_passed());
  }
  SUBCASE("no chemotaxis always satisfies the gap") {
    params.chi_phi = 0.0;
    params.psi.R1 = 1e-3;
    CHECK(validate_assumptions(params).find("Psi.chemotaxis_gap")->passed);
  }
  SUBCASE("non-positive chi_sigma") {
    params.chi_sigma = 0.0;
    const auto rep = validate_assumptions(params);
    CHECK_FALSE(rep.find("A1.chi_sigma")->passed);
    CHECK_FALSE(rep.find("Psi.chemotaxis_gap")->passed);
  }
  SUBCASE("q ranges") {
    params.p.q = 5.0;
    CHECK_FALSE(validate_assumptions(params).find("P.q_range")->passed);
    params.p.mode = ProliferationMode::P1;
    CHECK(validate_assumptions(params).find("P.q_range")->passed);
    params.p.q = 9.0;
    CHECK_FALSE(validate_assumptions(params).find("P.q_range")->passed);
  }
  SUBCASE("P2 requires strictly positive p") {
    params.p.p0 = 0.0;
    CHECK_FALSE(validate_assumptions(params).find("P2.positive")->passed);
  }
  SUBCASE("bracket constants too tight") {
    params.psi.c2 = 2.0;
    CHECK_FALSE(validate_assumptions(params).find("Psi.psi0_bracket")->passed);
  }
  SUBCASE("degenerate mobility") {
    params.mobility_m = {MobilityFamily::Bounded, 0.0, 1.0};
    CHECK_FALSE(validate_assumptions(params).find("M.mobility_m")->passed);
  }
  SUBCASE("reproducible") {
    const auto a = validate_assumptions(params), b = validate_assumptions(params);
    CHECK(a.summary() == b.summary());
    CHECK(a.minimal_R2 == b.minimal_R2);
  }
}
