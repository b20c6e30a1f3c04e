#pragma once

// Field arithmetic on rectangular Neumann domains.
//
// Nodes sit at cell midpoints x_i = (i + 1/2) h, so the sampled cosines
// cos(pi k x / L), k = 0..N-1, are exactly orthogonal under the discrete
// L2 inner product <u, v> = h * sum u_i v_i. Every linear operator in the
// model (Laplacian, A = -Laplacian + I, its inverse) is diagonal in that
// basis.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tumorlab {

inline constexpr int kMaxDims = 3;

class Grid {
 public:
  /// Throws std::invalid_argument for dims outside {1,2,3}, non-positive
  /// lengths, or fewer than 4 points on any axis.
  static Grid build(int dims, std::span<const double> lengths, std::span<const int> resolution);

  int dims() const { return dims_; }
  double length(int axis) const { return lengths_[axis]; }
  int resolution(int axis) const { return resolution_[axis]; }
  std::span<const double> lengths() const { return {lengths_.data(), static_cast<std::size_t>(dims_)}; }
  std::span<const int> resolutions() const { return {resolution_.data(), static_cast<std::size_t>(dims_)}; }

  std::size_t size() const { return size_; }
  double spacing(int axis) const { return lengths_[axis] / resolution_[axis]; }
  double cell_volume() const { return cell_volume_; }
  /// |Omega|, the product of the side lengths.
  double volume() const { return volume_; }
  double node(int axis, int i) const { return (i + 0.5) * spacing(axis); }

  /// Row-major (last axis fastest) multi-index of a flat position.
  std::array<int, kMaxDims> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, kMaxDims>& idx) const;

  /// pi k / L along one axis.
  double wavenumber(int axis, int k) const;
  /// Eigenvalue of A = -Laplacian + I for the cosine mode at a flat index.
  double eigenvalue(std::size_t flat) const { return 1.0 + laplacian_eigenvalue(flat); }
  /// Eigenvalue of -Laplacian (zero for the constant mode).
  double laplacian_eigenvalue(std::size_t flat) const;

  /// Same axis count, lengths and resolution, scaled by an integer factor.
  Grid refined(int factor) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  Grid() = default;
  int dims_ = 1;
  std::array<double, kMaxDims> lengths_{1.0, 1.0, 1.0};
  std::array<int, kMaxDims> resolution_{1, 1, 1};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  double volume_ = 0.0;
};

/// Sampled scalar field, one value per grid node.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  Field(const Grid& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  Field& operator+=(double c);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Coefficients in the L2-orthonormal cosine eigenbasis w_k of A.
struct ModeRep {
  Grid grid;
  std::vector<double> coefficients;

  explicit ModeRep(const Grid& g) : grid(g), coefficients(g.size(), 0.0) {}
  ModeRep(const Grid& g, std::vector<double> c);

  double eigenvalue(std::size_t flat) const { return grid.eigenvalue(flat); }
};

struct DualNormReport {
  double l2 = 0.0;
  double h1 = 0.0;
  double h1_dual = 0.0;
};

ModeRep to_modes(const Field& field);
Field from_modes(const ModeRep& rep);

Field apply_A(const Field& field);
Field apply_A_inv(const Field& field);
/// -Laplacian with homogeneous Neumann conditions.
Field apply_neg_laplacian(const Field& field);

DualNormReport norms(const Field& field);
/// sqrt(sum lambda_k^s a_k^2); s = 1 is the H1 norm, s = -1 the dual norm.
double sobolev_norm(const ModeRep& rep, double s);

double integral(const Field& field);
double mean_value(const Field& field);
/// Discrete L2 inner product h^d * sum u_i v_i.
double inner(const Field& u, const Field& v);
double l2_norm(const Field& field);

/// Partial derivatives sampled at the nodes. Component d is a sine series
/// along axis d and a cosine series along the others, so it vanishes on the
/// faces normal to d.
std::vector<Field> gradient(const Field& field);
/// Divergence of a flux whose components have the structure produced by
/// gradient(). The result has zero mean to rounding.
Field divergence(std::span<const Field> flux);

/// Flat mode indices ordered by eigenvalue (ties by flat index). The first
/// entry is always the constant mode.
std::vector<std::size_t> mode_order(const Grid& grid);

/// Value of the orthonormal eigenfunction w_k at every node.
Field eigenmode(const Grid& grid, std::size_t flat);

/// Copies coefficients of every physical mode representable on both grids.
/// Grids must share dims and lengths.
ModeRep transfer_modes(const ModeRep& rep, const Grid& target);

}  // namespace tumorlab
