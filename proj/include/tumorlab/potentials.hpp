#pragma once

// Bulk potential Psi = Psi0 + lambda, proliferation p, mobilities m and n,
// and sample-based checks of the standing structural assumptions.

#include <optional>
#include <string>
#include <vector>

namespace tumorlab {

/// Polynomial with coefficients listed lowest degree first.
struct Polynomial {
  std::vector<double> coefficients;

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  int degree() const;
  bool operator==(const Polynomial&) const = default;
};

struct PsiValues {
  double psi = 0.0;
  double dpsi = 0.0;
  double d2psi = 0.0;
};

enum class PotentialFamily { QuarticDoubleWell, CustomPolynomial };

struct PotentialSpec {
  PotentialFamily family = PotentialFamily::QuarticDoubleWell;
  /// Convex part with super-quadratic growth.
  Polynomial psi0;
  /// Perturbation with bounded second derivative.
  Polynomial lambda;
  /// When set, Psi0 is replaced outside [-m, m] by its second-order Taylor
  /// polynomial at +-m.
  std::optional<double> cutoff;

  double rho = 4.0;
  double c1 = 1.0;
  double c2 = 3.0;
  double alpha = 2.0;
  double R1 = 2.5;
  double R2 = 8.75;

  bool operator==(const PotentialSpec&) const = default;
};

/// 1/4 (s^2 - 1)^2 split as Psi0 = 1/4 (s^2-1)^2 + s^2, lambda = -s^2.
PotentialSpec quartic_double_well();

PsiValues psi_eval(const PotentialSpec& spec, double s);
/// Psi'(s) alone; cheaper than psi_eval in pointwise loops.
double psi_prime(const PotentialSpec& spec, double s);
/// Psi0 and its derivatives alone, including any truncation.
PsiValues psi0_eval(const PotentialSpec& spec, double s);

/// Quadratic-growth approximation of the potential. Throws
/// std::invalid_argument if m <= 1 or the base has rho <= 2.
PotentialSpec truncate_potential(const PotentialSpec& base, double m);

enum class ProliferationFamily { Constant, RationalBump, Polynomial };
enum class ProliferationMode { P1, P2 };

struct ProliferationSpec {
  ProliferationFamily family = ProliferationFamily::Constant;
  double p0 = 0.5;
  /// Floor of the rational bump delta + p0 / (1 + s^2).
  double delta = 0.0;
  Polynomial poly;
  double q = 1.0;
  ProliferationMode mode = ProliferationMode::P2;
  /// Constants of the growth bounds p <= c3 (1 + |s|^q), |p'| <= c4 (1 + |s|^(q-1)).
  double c3 = 1.0;
  double c4 = 1.0;

  bool operator==(const ProliferationSpec&) const = default;
};

struct ProliferationValues {
  double p = 0.0;
  double dp = 0.0;
};

ProliferationValues p_eval(const ProliferationSpec& spec, double s);

enum class MobilityFamily { Unit, Bounded };

struct MobilitySpec {
  MobilityFamily family = MobilityFamily::Unit;
  /// Bounded family: m(s) = lower + (upper - lower) / (1 + s^2).
  double lower = 1.0;
  double upper = 1.0;

  bool is_unit() const { return family == MobilityFamily::Unit; }
  bool operator==(const MobilitySpec&) const = default;
};

double mobility_eval(const MobilitySpec& spec, double s);
/// Upper bound used for the implicit part of variable-mobility splitting.
double mobility_upper(const MobilitySpec& spec);

struct ModelParams {
  double chi_phi = 1.0;
  double chi_sigma = 1.0;
  PotentialSpec psi = quartic_double_well();
  ProliferationSpec p;
  MobilitySpec mobility_m;
  MobilitySpec mobility_n;

  bool operator==(const ModelParams&) const = default;
};

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  /// max_s (R1 s^2 - Psi(s)) over the sample, i.e. the least admissible R2.
  double minimal_R2 = 0.0;
  /// R1 - 2 chi_phi^2 / chi_sigma.
  double chemotaxis_gap = 0.0;

  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
  std::string summary() const;
};

struct ValidationOptions {
  double half_width = 10.0;
  int samples = 20001;
};

/// Never throws on a failing assumption; every failure is a report entry.
AssumptionReport validate_assumptions(const ModelParams& params, const ValidationOptions& opts = {});

/// min over s of Psi(s) - R1 s^2, by dense sampling then golden-section
/// refinement of the best bracket.
double minimize_psi_minus_quadratic(const PotentialSpec& spec, double R1, double half_width, int samples);

}  // namespace tumorlab
