#include "parabolic/grid.hpp"

#include <cmath>
#include <string>

#include "fft.hpp"
#include "parabolic/errors.hpp"
#include "parabolic/kernels.hpp"

namespace parabolic {

namespace {

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

// Spectral view of a field, computing it only if absent.
std::vector<cplx> spectral_copy(const ScalarField& field) {
  if (field.has_spectral()) {
    auto s = field.spectral();
    return {s.begin(), s.end()};
  }
  return forward_coefficients(field.grid(), field.values());
}

std::vector<double> values_copy(const ScalarField& field) {
  if (field.has_values()) {
    auto v = field.values();
    return {v.begin(), v.end()};
  }
  return backward_values(field.grid(), field.spectral());
}

}  // namespace

GridSpec::GridSpec(int dim, int points, double length) : dim_(dim), points_(points), length_(length) {
  if (dim < 1 || dim > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1..3, got " + std::to_string(dim));
  }
  if (points < 8 || points % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "points per axis must be even and >= 8, got " + std::to_string(points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw Error(ErrorCode::InvalidArgument, "axis length must be positive and finite");
  }
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(points);

  auto tables = std::make_shared<std::vector<std::vector<double>>>(static_cast<std::size_t>(dim));
  const double scale = wavenumber_scale();
  for (int a = 0; a < dim; ++a) {
    auto& k = (*tables)[static_cast<std::size_t>(a)];
    k.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      const int slot = unravel(i)[static_cast<std::size_t>(a)];
      k[i] = is_nyquist_slot(slot) ? 0.0 : scale * lattice_index(slot);
    }
  }
  derivative_wavenumbers_ = std::move(tables);
}

double GridSpec::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double GridSpec::volume() const noexcept { return std::pow(length_, dim_); }

double GridSpec::max_wavenumber() const noexcept {
  return std::sqrt(static_cast<double>(dim_)) * (points_ / 2) * wavenumber_scale();
}

std::array<int, kMaxDim> GridSpec::unravel(std::size_t linear) const noexcept {
  std::array<int, kMaxDim> slots{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    slots[static_cast<std::size_t>(a)] = static_cast<int>(linear % static_cast<std::size_t>(points_));
    linear /= static_cast<std::size_t>(points_);
  }
  return slots;
}

std::size_t GridSpec::ravel(const std::array<int, kMaxDim>& slots) const noexcept {
  std::size_t linear = 0;
  for (int a = 0; a < dim_; ++a) {
    linear = linear * static_cast<std::size_t>(points_) + static_cast<std::size_t>(slots[static_cast<std::size_t>(a)]);
  }
  return linear;
}

std::array<int, kMaxDim> GridSpec::lattice(std::size_t linear) const noexcept {
  auto slots = unravel(linear);
  for (int a = 0; a < dim_; ++a) {
    auto& s = slots[static_cast<std::size_t>(a)];
    s = lattice_index(s);
  }
  return slots;
}

std::array<double, kMaxDim> GridSpec::coordinate(std::size_t linear) const noexcept {
  const auto slots = unravel(linear);
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    x[static_cast<std::size_t>(a)] = spacing() * slots[static_cast<std::size_t>(a)];
  }
  return x;
}

std::span<const double> GridSpec::derivative_wavenumbers(int axis) const {
  if (axis < 0 || axis >= dim_) {
    throw Error(ErrorCode::InvalidAxis, "axis " + std::to_string(axis) + " outside 0.." +
                                            std::to_string(dim_ - 1));
  }
  return (*derivative_wavenumbers_)[static_cast<std::size_t>(axis)];
}

ScalarField ScalarField::zeros(const GridSpec& grid) {
  ScalarField f(grid);
  f.values_.emplace(grid.size(), 0.0);
  f.spectral_.emplace(grid.size(), cplx(0.0, 0.0));
  return f;
}

ScalarField ScalarField::from_values(const GridSpec& grid, std::vector<double> values) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match grid size");
  }
  ScalarField f(grid);
  f.values_ = std::move(values);
  return f;
}

ScalarField ScalarField::from_spectral(const GridSpec& grid, std::vector<cplx> coefficients) {
  if (coefficients.size() != grid.size()) {
    throw Error(ErrorCode::InvalidArgument, "coefficient count does not match grid size");
  }
  ScalarField f(grid);
  f.spectral_ = std::move(coefficients);
  return f;
}

std::span<const double> ScalarField::values() const {
  if (!values_) throw Error(ErrorCode::InvalidArgument, "physical view not populated");
  return *values_;
}

std::span<const cplx> ScalarField::spectral() const {
  if (!spectral_) throw Error(ErrorCode::InvalidArgument, "spectral view not populated");
  return *spectral_;
}

ScalarField sample(const GridSpec& grid,
                   const std::function<double(const std::array<double, kMaxDim>&)>& fn) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(grid.coordinate(i));
  return ScalarField::from_values(grid, std::move(values));
}

std::vector<cplx> forward_coefficients(const GridSpec& grid, std::span<const double> values) {
  const auto engine = detail::FftEngine::get(grid.dim(), grid.points());
  std::vector<cplx> in(values.begin(), values.end());
  std::vector<cplx> out(grid.size());
  engine->forward(in, out);
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (auto& c : out) c *= norm;
  return out;
}

std::vector<double> backward_values(const GridSpec& grid, std::span<const cplx> coefficients) {
  const auto engine = detail::FftEngine::get(grid.dim(), grid.points());
  std::vector<cplx> out(grid.size());
  engine->backward(coefficients, out);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = out[i].real();
  return values;
}

ScalarField transform_forward(const ScalarField& field) {
  ScalarField out = field;
  if (!out.spectral_) out.spectral_ = forward_coefficients(field.grid(), field.values());
  return out;
}

ScalarField transform_backward(const ScalarField& field) {
  ScalarField out = field;
  if (!out.values_) out.values_ = backward_values(field.grid(), field.spectral());
  return out;
}

ScalarField spectral_derivative(const ScalarField& field, int axis) {
  const GridSpec& grid = field.grid();
  const auto k = grid.derivative_wavenumbers(axis);
  const std::vector<cplx> c = spectral_copy(field);
  std::vector<cplx> d(c.size());
  kernels::imag_scale(c, k, d);
  return transform_backward(ScalarField::from_spectral(grid, std::move(d)));
}

std::vector<std::array<int, kMaxDim>> multi_indices(int dim, int k) {
  std::vector<std::array<int, kMaxDim>> out;
  if (k < 0 || dim < 1 || dim > kMaxDim) return out;
  std::array<int, kMaxDim> alpha{0, 0, 0};
  // Fill alpha[axis..dim-1] with total `remaining`.
  std::function<void(int, int)> fill = [&](int axis, int remaining) {
    if (axis == dim - 1) {
      alpha[static_cast<std::size_t>(axis)] = remaining;
      out.push_back(alpha);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[static_cast<std::size_t>(axis)] = a;
      fill(axis + 1, remaining - a);
    }
  };
  fill(0, k);
  for (auto& a : out) {
    for (int i = dim; i < kMaxDim; ++i) a[static_cast<std::size_t>(i)] = 0;
  }
  return out;
}

std::vector<double> sobolev_multiplier(const GridSpec& grid, int k) {
  if (k < 0 || k > kMaxSobolevOrder) {
    throw Error(ErrorCode::InvalidArgument,
                "Sobolev order must be 0.." + std::to_string(kMaxSobolevOrder));
  }
  std::vector<double> mult(grid.size(), 1.0);
  if (k == 0) return mult;

  const auto alphas = multi_indices(grid.dim(), k);
  const int dim = grid.dim();
  std::array<std::span<const double>, kMaxDim> kappa;
  for (int a = 0; a < dim; ++a) kappa[static_cast<std::size_t>(a)] = grid.derivative_wavenumbers(a);

  std::array<std::array<double, kMaxSobolevOrder + 1>, kMaxDim> powers{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < dim; ++a) {
      const double q = kappa[static_cast<std::size_t>(a)][i] * kappa[static_cast<std::size_t>(a)][i];
      auto& p = powers[static_cast<std::size_t>(a)];
      p[0] = 1.0;
      for (int j = 1; j <= k; ++j) p[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j - 1)] * q;
    }
    double sum = 0.0;
    for (const auto& alpha : alphas) {
      double term = 1.0;
      for (int a = 0; a < dim; ++a) {
        term *= powers[static_cast<std::size_t>(a)][static_cast<std::size_t>(alpha[static_cast<std::size_t>(a)])];
      }
      sum += term;
    }
    mult[i] = sum;
  }
  return mult;
}

double sobolev_norm(const ScalarField& field, int k) {
  const auto mult = sobolev_multiplier(field.grid(), k);
  if (field.has_spectral()) {
    return field.grid().volume() * kernels::weighted_energy(field.spectral(), mult);
  }
  const auto c = spectral_copy(field);
  return field.grid().volume() * kernels::weighted_energy(c, mult);
}

double inner_product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  const GridSpec& grid = a.grid();
  if (a.has_values() && b.has_values()) {
    return grid.cell_volume() * kernels::dot(a.values(), b.values());
  }
  const auto va = values_copy(a);
  const auto vb = values_copy(b);
  return grid.cell_volume() * kernels::dot(va, vb);
}

double mean(const ScalarField& field) {
  if (field.has_spectral()) return field.spectral()[0].real();
  const auto v = field.values();
  long double sum = 0.0L;
  for (double x : v) sum += x;
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

ScalarField resample(const ScalarField& field, const GridSpec& target) {
  const GridSpec& source = field.grid();
  if (source.dim() != target.dim() || source.length() != target.length()) {
    throw Error(ErrorCode::GridMismatch, "resampling requires equal dimension and length");
  }
  if (source == target) return field;
  const auto c = spectral_copy(field);
  std::vector<cplx> out(target.size(), cplx(0.0, 0.0));
  const int limit = std::min(source.points(), target.points()) / 2;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto xi = source.lattice(i);
    bool fits = true;
    std::array<int, kMaxDim> slots{0, 0, 0};
    for (int a = 0; a < source.dim(); ++a) {
      const int x = xi[static_cast<std::size_t>(a)];
      if (x >= limit || x <= -limit) {
        fits = false;
        break;
      }
      slots[static_cast<std::size_t>(a)] = target.slot_of(x);
    }
    if (fits) out[target.ravel(slots)] = c[i];
  }
  return transform_backward(ScalarField::from_spectral(target, std::move(out)));
}

ScalarField combine(double a, const ScalarField& x, double b, const ScalarField& y) {
  require_same_grid(x.grid(), y.grid());
  const GridSpec& grid = x.grid();
  const bool use_values = x.has_values() && y.has_values();
  const bool use_spectral = (x.has_spectral() && y.has_spectral()) || !use_values;

  ScalarField out(grid);
  if (use_values) {
    auto xv = x.values();
    auto yv = y.values();
    auto& v = out.values_.emplace(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = a * xv[i] + b * yv[i];
  }
  if (use_spectral) {
    const auto xs = spectral_copy(x);
    const auto ys = spectral_copy(y);
    auto& s = out.spectral_.emplace(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s[i] = a * xs[i] + b * ys[i];
  }
  return out;
}

double l2_distance(const ScalarField& a, const ScalarField& b) {
  return std::sqrt(sobolev_norm(combine(1.0, a, -1.0, b), 0));
}

}  // namespace parabolic
