#include "tumorlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tumorlab {

double Polynomial::value(double s) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::derivative(double s) const {
  double acc = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * coefficients[k];
  return acc;
}

double Polynomial::second_derivative(double s) const {
  double acc = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 2;) {
    acc = acc * s + static_cast<double>(k * (k - 1)) * coefficients[k];
  }
  return acc;
}

int Polynomial::degree() const {
  for (std::size_t k = coefficients.size(); k-- > 0;) {
    if (coefficients[k] != 0.0) return static_cast<int>(k);
  }
  return 0;
}

PotentialSpec quartic_double_well() {
  PotentialSpec spec;
  spec.family = PotentialFamily::QuarticDoubleWell;
  spec.psi0.coefficients = {0.25, 0.0, 0.5, 0.0, 0.25};
  spec.lambda.coefficients = {0.0, 0.0, -1.0};
  spec.rho = 4.0;
  spec.c1 = 1.0;
  spec.c2 = 3.0;
  spec.alpha = 2.0;
  spec.R1 = 2.5;
  spec.R2 = 8.75;
  return spec;
}

PsiValues psi0_eval(const PotentialSpec& spec, double s) {
  const Polynomial& p = spec.psi0;
  if (spec.cutoff && std::abs(s) > *spec.cutoff) {
    const double edge = s > 0 ? *spec.cutoff : -*spec.cutoff;
    const double f = p.value(edge), df = p.derivative(edge), d2f = p.second_derivative(edge);
    const double h = s - edge;
    return {f + df * h + 0.5 * d2f * h * h, df + d2f * h, d2f};
  }
  return {p.value(s), p.derivative(s), p.second_derivative(s)};
}

PsiValues psi_eval(const PotentialSpec& spec, double s) {
  PsiValues v = psi0_eval(spec, s);
  v.psi += spec.lambda.value(s);
  v.dpsi += spec.lambda.derivative(s);
  v.d2psi += spec.lambda.second_derivative(s);
  return v;
}

double psi_prime(const PotentialSpec& spec, double s) {
  const Polynomial& p = spec.psi0;
  double d;
  if (spec.cutoff && std::abs(s) > *spec.cutoff) {
    const double edge = s > 0 ? *spec.cutoff : -*spec.cutoff;
    d = p.derivative(edge) + p.second_derivative(edge) * (s - edge);
  } else {
    d = p.derivative(s);
  }
  return d + spec.lambda.derivative(s);
}

PotentialSpec truncate_potential(const PotentialSpec& base, double m) {
  if (!(m > 1.0)) throw std::invalid_argument("truncation cutoff must exceed 1");
  if (!(base.rho > 2.0)) throw std::invalid_argument("truncation needs a base potential with rho > 2");
  PotentialSpec out = base;
  out.cutoff = base.cutoff ? std::min(*base.cutoff, m) : m;
  // The truncated Psi0'' is bounded, so the growth exponent drops to 2.
  out.rho = 2.0;
  out.c1 = 0.5 * base.c1;
  out.c2 = 0.5 * base.c2 * (1.0 + std::pow(*out.cutoff, base.rho - 2.0));
  return out;
}

ProliferationValues p_eval(const ProliferationSpec& spec, double s) {
  switch (spec.family) {
    case ProliferationFamily::Constant:
      return {spec.p0, 0.0};
    case ProliferationFamily::RationalBump: {
      const double denom = 1.0 + s * s;
      return {spec.delta + spec.p0 / denom, -2.0 * spec.p0 * s / (denom * denom)};
    }
    case ProliferationFamily::Polynomial: {
      const double v = spec.poly.value(s);
      if (v <= 0.0) return {0.0, 0.0};
      return {v, spec.poly.derivative(s)};
    }
  }
  return {0.0, 0.0};
}

double mobility_eval(const MobilitySpec& spec, double s) {
  if (spec.family == MobilityFamily::Unit) return 1.0;
  return spec.lower + (spec.upper - spec.lower) / (1.0 + s * s);
}

double mobility_upper(const MobilitySpec& spec) {
  return spec.family == MobilityFamily::Unit ? 1.0 : std::max(spec.lower, spec.upper);
}

// ---------------------------------------------------------------------------

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string AssumptionReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    if (!c.passed) out << c.name << ": " << c.detail << "; ";
  }
  std::string s = out.str();
  return s.empty() ? "all assumptions hold" : s.substr(0, s.size() - 2);
}

double minimize_psi_minus_quadratic(const PotentialSpec& spec, double R1, double half_width, int samples) {
  const auto f = [&](double s) { return psi_eval(spec, s).psi - R1 * s * s; };
  const double h = 2.0 * half_width / (samples - 1);
  int best = 0;
  double best_val = f(-half_width);
  for (int i = 1; i < samples; ++i) {
    const double v = f(-half_width + i * h);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = -half_width + std::max(best - 1, 0) * h;
  double b = -half_width + std::min(best + 1, samples - 1) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({best_val, f1, f2});
}

namespace {

std::string fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

template <class Pred>
AssumptionCheck sampled_check(std::string name, const ValidationOptions& opts, Pred ok) {
  const double h = 2.0 * opts.half_width / (opts.samples - 1);
  for (int i = 0; i < opts.samples; ++i) {
    const double s = -opts.half_width + i * h;
    if (!ok(s)) return {std::move(name), false, "violated at s = " + fmt(s)};
  }
  return {std::move(name), true, "holds on [-" + fmt(opts.half_width) + ", " + fmt(opts.half_width) + "]"};
}

AssumptionCheck mobility_check(const std::string& name, const MobilitySpec& spec, const ValidationOptions& opts) {
  if (spec.is_unit()) return {name, true, "unit mobility"};
  if (!(spec.lower > 0.0) || spec.upper < spec.lower) {
    return {name, false, "need 0 < lower <= upper"};
  }
  return sampled_check(name, opts, [&](double s) {
    const double m = mobility_eval(spec, s);
    return m >= spec.lower * (1 - 1e-14) && m <= spec.upper * (1 + 1e-14);
  });
}

}  // namespace

AssumptionReport validate_assumptions(const ModelParams& params, const ValidationOptions& opts) {
  AssumptionReport rep;
  auto& checks = rep.checks;
  const PotentialSpec& psi = params.psi;

  checks.push_back({"A1.chi_sigma", params.chi_sigma > 0.0, "chi_sigma must be positive"});
  checks.push_back({"A1.chi_phi", params.chi_phi >= 0.0, "chi_phi must be nonnegative"});

  checks.push_back({"Psi.rho", psi.rho >= 2.0 && psi.rho < 6.0, "rho = " + fmt(psi.rho) + " must lie in [2, 6)"});
  checks.push_back(sampled_check("Psi.lambda_curvature", opts, [&](double s) {
    return std::abs(psi.lambda.second_derivative(s)) <= psi.alpha * (1 + 1e-14);
  }));
  checks.push_back(sampled_check("Psi.psi0_bracket", opts, [&](double s) {
    const double g = 1.0 + std::pow(std::abs(s), psi.rho - 2.0);
    const double d2 = psi0_eval(psi, s).d2psi;
    const double slack = 1e-12 * (1.0 + std::abs(d2));
    return psi.c1 * g <= d2 + slack && d2 <= psi.c2 * g + slack;
  }));

  const double min_val = minimize_psi_minus_quadratic(psi, psi.R1, opts.half_width, opts.samples);
  rep.minimal_R2 = -min_val;
  {
    // The minimum must sit strictly inside the sampled window, otherwise
    // Psi - R1 s^2 is still decreasing at the edge and no R2 exists.
    const double edge = std::min(psi_eval(psi, opts.half_width).psi - psi.R1 * opts.half_width * opts.half_width,
                                 psi_eval(psi, -opts.half_width).psi - psi.R1 * opts.half_width * opts.half_width);
    const bool interior = min_val < edge;
    checks.push_back({"Psi.coercivity", interior,
                      interior ? "Psi(s) >= R1 s^2 - R2 with minimal R2 = " + fmt(rep.minimal_R2)
                               : "Psi - R1 s^2 not bounded below on the sample window"});
  }

  if (params.chi_sigma > 0.0) {
    const double threshold = 2.0 * params.chi_phi * params.chi_phi / params.chi_sigma;
    rep.chemotaxis_gap = psi.R1 - threshold;
    checks.push_back({"Psi.chemotaxis_gap", psi.R1 > threshold,
                      "R1 = " + fmt(psi.R1) + " vs 2 chi_phi^2 / chi_sigma = " + fmt(threshold)});
  } else {
    rep.chemotaxis_gap = -INFINITY;
    checks.push_back({"Psi.chemotaxis_gap", false, "undefined for chi_sigma <= 0"});
  }

  const ProliferationSpec& p = params.p;
  const bool p2 = p.mode == ProliferationMode::P2;
  const bool q_ok = p2 ? (p.q >= 1.0 && p.q <= 4.0) : (p.q >= 1.0 && p.q < 9.0);
  checks.push_back({"P.q_range", q_ok, "q = " + fmt(p.q) + (p2 ? " must lie in [1, 4]" : " must lie in [1, 9)")});
  checks.push_back(sampled_check("P.growth", opts, [&](double s) {
    const double v = p_eval(p, s).p;
    return v >= 0.0 && v <= p.c3 * (1.0 + std::pow(std::abs(s), p.q)) * (1 + 1e-14);
  }));
  if (p2) {
    checks.push_back(sampled_check("P2.positive", opts, [&](double s) { return p_eval(p, s).p > 0.0; }));
    checks.push_back(sampled_check("P2.derivative_growth", opts, [&](double s) {
      return std::abs(p_eval(p, s).dp) <= p.c4 * (1.0 + std::pow(std::abs(s), p.q - 1.0)) * (1 + 1e-14);
    }));
  }

  checks.push_back(mobility_check("M.mobility_m", params.mobility_m, opts));
  checks.push_back(mobility_check("M.mobility_n", params.mobility_n, opts));
  return rep;
}

}  // namespace tumorlab
