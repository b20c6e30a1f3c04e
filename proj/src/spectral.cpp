#include "tumorlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace tumorlab {

// ---------------------------------------------------------------------------
// Grid

Grid Grid::build(int dims, std::span<const double> lengths, std::span<const int> resolution) {
  if (dims < 1 || dims > kMaxDims) {
    throw std::invalid_argument("grid dims must be 1, 2 or 3 (got " + std::to_string(dims) + ")");
  }
  if (lengths.size() != static_cast<std::size_t>(dims) ||
      resolution.size() != static_cast<std::size_t>(dims)) {
    throw std::invalid_argument("grid needs exactly one length and one resolution per axis");
  }
  Grid g;
  g.dims_ = dims;
  g.size_ = 1;
  g.volume_ = 1.0;
  for (int a = 0; a < dims; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      throw std::invalid_argument("grid length on axis " + std::to_string(a) + " must be positive");
    }
    if (resolution[a] < 4) {
      throw std::invalid_argument("grid resolution on axis " + std::to_string(a) +
                                  " too small (need >= 4, got " + std::to_string(resolution[a]) + ")");
    }
    g.lengths_[a] = lengths[a];
    g.resolution_[a] = resolution[a];
    g.size_ *= static_cast<std::size_t>(resolution[a]);
    g.volume_ *= lengths[a];
  }
  g.cell_volume_ = 1.0;
  for (int a = 0; a < dims; ++a) g.cell_volume_ *= g.spacing(a);
  return g;
}

std::array<int, kMaxDims> Grid::unflatten(std::size_t flat) const {
  std::array<int, kMaxDims> idx{0, 0, 0};
  for (int a = dims_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(resolution_[a]));
    flat /= static_cast<std::size_t>(resolution_[a]);
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, kMaxDims>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dims_; ++a) flat = flat * static_cast<std::size_t>(resolution_[a]) + idx[a];
  return flat;
}

double Grid::wavenumber(int axis, int k) const { return std::numbers::pi * k / lengths_[axis]; }

double Grid::laplacian_eigenvalue(std::size_t flat) const {
  const auto idx = unflatten(flat);
  double ell = 0.0;
  for (int a = 0; a < dims_; ++a) {
    const double kappa = wavenumber(a, idx[a]);
    ell += kappa * kappa;
  }
  return ell;
}

Grid Grid::refined(int factor) const {
  std::array<int, kMaxDims> res{};
  for (int a = 0; a < dims_; ++a) res[a] = resolution_[a] * factor;
  return build(dims_, lengths(), std::span<const int>(res.data(), dims_));
}

bool Grid::operator==(const Grid& other) const {
  if (dims_ != other.dims_) return false;
  for (int a = 0; a < dims_; ++a) {
    if (lengths_[a] != other.lengths_[a] || resolution_[a] != other.resolution_[a]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Field / ModeRep

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
}

bool Field::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

namespace {
void require_same_grid(const Grid& a, const Grid& b) {
  if (a != b) throw std::invalid_argument("fields live on different grids");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid, other.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

Field& Field::operator+=(double c) {
  for (double& v : values) v += c;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

ModeRep::ModeRep(const Grid& g, std::vector<double> c) : grid(g), coefficients(std::move(c)) {
  if (coefficients.size() != grid.size()) throw std::invalid_argument("mode vector size does not match grid");
}

// ---------------------------------------------------------------------------
// Raw transforms.
//
// Raw cosine series along an axis: f(x_j) = sum_{k=0}^{N-1} r_k cos(pi k (j+1/2)/N).
// Raw sine series: f(x_j) = sum_{k=1}^{N} r_k sin(pi k (j+1/2)/N), stored at k-1.

namespace {

enum class AxisKind { Cos, Sin };
using Kinds = std::array<AxisKind, kMaxDims>;

Kinds all_cos() { return {AxisKind::Cos, AxisKind::Cos, AxisKind::Cos}; }

Kinds sin_on(int axis) {
  Kinds k = all_cos();
  k[axis] = AxisKind::Sin;
  return k;
}

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const Grid& grid, const Kinds& kinds, bool forward) {
    Key key{grid.dims(), {}, {}, forward};
    for (int a = 0; a < grid.dims(); ++a) {
      key.n[a] = grid.resolution(a);
      key.kinds[a] = static_cast<int>(kinds[a]);
    }
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::array<fftw_r2r_kind, kMaxDims> fk{};
    for (int a = 0; a < grid.dims(); ++a) {
      if (kinds[a] == AxisKind::Cos) {
        fk[a] = forward ? FFTW_REDFT10 : FFTW_REDFT01;
      } else {
        fk[a] = forward ? FFTW_RODFT10 : FFTW_RODFT01;
      }
    }
    std::vector<double> scratch(grid.size());
    fftw_plan plan = fftw_plan_r2r(grid.dims(), key.n.data(), scratch.data(), scratch.data(), fk.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  struct Key {
    int dims;
    std::array<int, kMaxDims> n;
    std::array<int, kMaxDims> kinds;
    bool forward;
    bool operator<(const Key& o) const {
      return std::tie(dims, n, kinds, forward) < std::tie(o.dims, o.n, o.kinds, o.forward);
    }
  };
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

// Multiplies entry i by the product over axes of factors[a][idx_a(i)].
void scale_by_axis(const Grid& grid, std::vector<double>& data,
                   const std::array<std::vector<double>, kMaxDims>& factors) {
  std::size_t stride = 1;
  for (int a = grid.dims() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(grid.resolution(a));
    const auto& f = factors[a];
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < data.size(); base += block) {
      for (std::size_t j = 0; j < n; ++j) {
        double* row = data.data() + base + j * stride;
        const double fj = f[j];
        for (std::size_t i = 0; i < stride; ++i) row[i] *= fj;
      }
    }
    stride = block;
  }
}

std::vector<double> raw_forward(const Grid& grid, std::span<const double> values, const Kinds& kinds) {
  std::vector<double> out(values.begin(), values.end());
  fftw_execute_r2r(PlanCache::instance().get(grid, kinds, true), out.data(), out.data());
  std::array<std::vector<double>, kMaxDims> factors;
  for (int a = 0; a < grid.dims(); ++a) {
    const int n = grid.resolution(a);
    factors[a].assign(n, 1.0 / n);
    if (kinds[a] == AxisKind::Cos) {
      factors[a][0] = 0.5 / n;
    } else {
      factors[a][n - 1] = 0.5 / n;
    }
  }
  scale_by_axis(grid, out, factors);
  return out;
}

std::vector<double> raw_inverse(const Grid& grid, std::span<const double> coeffs, const Kinds& kinds) {
  std::vector<double> out(coeffs.begin(), coeffs.end());
  std::array<std::vector<double>, kMaxDims> factors;
  for (int a = 0; a < grid.dims(); ++a) {
    const int n = grid.resolution(a);
    factors[a].assign(n, 0.5);
    if (kinds[a] == AxisKind::Cos) {
      factors[a][0] = 1.0;
    } else {
      factors[a][n - 1] = 1.0;
    }
  }
  scale_by_axis(grid, out, factors);
  fftw_execute_r2r(PlanCache::instance().get(grid, kinds, false), out.data(), out.data());
  return out;
}

// Normalisation constants of the orthonormal cosines: 1/sqrt(L) for k = 0,
// sqrt(2/L) otherwise.
std::array<std::vector<double>, kMaxDims> basis_norms(const Grid& grid, bool inverse) {
  std::array<std::vector<double>, kMaxDims> c;
  for (int a = 0; a < grid.dims(); ++a) {
    const double len = grid.length(a);
    c[a].assign(grid.resolution(a), inverse ? std::sqrt(len / 2.0) : std::sqrt(2.0 / len));
    c[a][0] = inverse ? std::sqrt(len) : 1.0 / std::sqrt(len);
  }
  return c;
}

}  // namespace

ModeRep to_modes(const Field& field) {
  auto raw = raw_forward(field.grid, field.values, all_cos());
  scale_by_axis(field.grid, raw, basis_norms(field.grid, true));
  return ModeRep(field.grid, std::move(raw));
}

Field from_modes(const ModeRep& rep) {
  std::vector<double> raw = rep.coefficients;
  scale_by_axis(rep.grid, raw, basis_norms(rep.grid, false));
  return Field(rep.grid, raw_inverse(rep.grid, raw, all_cos()));
}

namespace {
Field diagonal_apply(const Field& field, double (*weight)(const Grid&, std::size_t)) {
  ModeRep rep = to_modes(field);
  for (std::size_t k = 0; k < rep.coefficients.size(); ++k) rep.coefficients[k] *= weight(field.grid, k);
  return from_modes(rep);
}
}  // namespace

Field apply_A(const Field& field) {
  return diagonal_apply(field, [](const Grid& g, std::size_t k) { return g.eigenvalue(k); });
}

Field apply_A_inv(const Field& field) {
  return diagonal_apply(field, [](const Grid& g, std::size_t k) { return 1.0 / g.eigenvalue(k); });
}

Field apply_neg_laplacian(const Field& field) {
  return diagonal_apply(field, [](const Grid& g, std::size_t k) { return g.laplacian_eigenvalue(k); });
}

double sobolev_norm(const ModeRep& rep, double s) {
  double acc = 0.0;
  for (std::size_t k = 0; k < rep.coefficients.size(); ++k) {
    const double a = rep.coefficients[k];
    acc += std::pow(rep.grid.eigenvalue(k), s) * a * a;
  }
  return std::sqrt(acc);
}

DualNormReport norms(const Field& field) {
  const ModeRep rep = to_modes(field);
  double l2 = 0.0, h1 = 0.0, dual = 0.0;
  for (std::size_t k = 0; k < rep.coefficients.size(); ++k) {
    const double a2 = rep.coefficients[k] * rep.coefficients[k];
    const double lam = rep.grid.eigenvalue(k);
    l2 += a2;
    h1 += lam * a2;
    dual += a2 / lam;
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(dual)};
}

double integral(const Field& field) {
  // Compensated sum; the mass diagnostics sit at rounding level.
  double sum = 0.0, comp = 0.0;
  for (double v : field.values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum * field.grid.cell_volume();
}

double mean_value(const Field& field) { return integral(field) / field.grid.volume(); }

double inner(const Field& u, const Field& v) {
  require_same_grid(u.grid, v.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) acc += u.values[i] * v.values[i];
  return acc * u.grid.cell_volume();
}

double l2_norm(const Field& field) { return std::sqrt(inner(field, field)); }

std::vector<Field> gradient(const Field& field) {
  const Grid& grid = field.grid;
  ModeRep rep = to_modes(field);
  std::vector<double> raw = rep.coefficients;
  scale_by_axis(grid, raw, basis_norms(grid, false));

  std::vector<Field> out;
  out.reserve(grid.dims());
  for (int d = 0; d < grid.dims(); ++d) {
    std::vector<double> sine(grid.size(), 0.0);
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
      auto idx = grid.unflatten(flat);
      const int k = idx[d];
      if (k == 0) continue;
      const double coeff = -grid.wavenumber(d, k) * raw[flat];
      idx[d] = k - 1;
      sine[grid.flatten(idx)] = coeff;
    }
    out.emplace_back(grid, raw_inverse(grid, sine, sin_on(d)));
  }
  return out;
}

Field divergence(std::span<const Field> flux) {
  if (flux.empty()) throw std::invalid_argument("divergence needs one flux component per axis");
  const Grid& grid = flux.front().grid;
  if (flux.size() != static_cast<std::size_t>(grid.dims())) {
    throw std::invalid_argument("divergence needs one flux component per axis");
  }
  std::vector<double> cosine(grid.size(), 0.0);
  for (int d = 0; d < grid.dims(); ++d) {
    require_same_grid(grid, flux[d].grid);
    const auto sine = raw_forward(grid, flux[d].values, sin_on(d));
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
      auto idx = grid.unflatten(flat);
      const int k = idx[d];
      if (k == 0) continue;
      idx[d] = k - 1;
      cosine[flat] += grid.wavenumber(d, k) * sine[grid.flatten(idx)];
    }
  }
  return Field(grid, raw_inverse(grid, cosine, all_cos()));
}

std::vector<std::size_t> mode_order(const Grid& grid) {
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> lam(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) lam[k] = grid.eigenvalue(k);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lam[a] < lam[b]; });
  return order;
}

Field eigenmode(const Grid& grid, std::size_t flat) {
  ModeRep rep(grid);
  rep.coefficients.at(flat) = 1.0;
  return from_modes(rep);
}

ModeRep transfer_modes(const ModeRep& rep, const Grid& target) {
  const Grid& src = rep.grid;
  if (src.dims() != target.dims()) throw std::invalid_argument("transfer_modes: dimension mismatch");
  for (int a = 0; a < src.dims(); ++a) {
    if (src.length(a) != target.length(a)) throw std::invalid_argument("transfer_modes: length mismatch");
  }
  ModeRep out(target);
  for (std::size_t flat = 0; flat < src.size(); ++flat) {
    const auto idx = src.unflatten(flat);
    bool fits = true;
    for (int a = 0; a < src.dims(); ++a) fits = fits && idx[a] < target.resolution(a);
    if (fits) out.coefficients[target.flatten(idx)] = rep.coefficients[flat];
  }
  return out;
}

}  // namespace tumorlab
