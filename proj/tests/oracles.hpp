#pragma once

// Reference solutions shared by unit and acceptance tests. Nothing here
// calls into the solver or the Galerkin integrator.

#include <algorithm>
#include <array>
#include <cmath>

#include "tumorlab/potentials.hpp"

namespace oracle {

// Right-hand side of the spatially constant system c' = p(c)(N - mu), d' = -c'.
inline double exchange_rate(const tumorlab::ModelParams& params, double c, double d) {
  const double mu = tumorlab::psi_eval(params.psi, c).dpsi - params.chi_phi * d;
  const double n = params.chi_sigma * d + params.chi_phi * (1.0 - c);
  return tumorlab::p_eval(params.p, c).p * (n - mu);
}

// Step-doubling RK4 with Richardson extrapolation on the scalar (c, d) system.
inline std::array<double, 2> constant_state(const tumorlab::ModelParams& params, double c, double d, double T,
                                            double tol = 1e-14) {
  // c + d is invariant, so integrate c alone.
  const double total = c + d;
  const auto rk4 = [&](double c0, double h) {
    const auto f = [&](double x) { return exchange_rate(params, x, total - x); };
    const double k1 = f(c0), k2 = f(c0 + 0.5 * h * k1), k3 = f(c0 + 0.5 * h * k2), k4 = f(c0 + h * k3);
    return c0 + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  double t = 0.0, h = 1e-3, x = c;
  while (t < T) {
    h = std::min(h, T - t);
    const double big = rk4(x, h);
    const double small = rk4(rk4(x, 0.5 * h), 0.5 * h);
    const double err = std::abs(small - big) / 15.0;
    if (err <= tol * (1.0 + std::abs(x)) || h < 1e-12) {
      x = small + (small - big) / 15.0;
      t += h;
      h *= std::clamp(0.9 * std::pow(tol / std::max(err, 1e-300), 0.2), 0.2, 4.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
    }
  }
  return {x, total - x};
}

}  // namespace oracle
