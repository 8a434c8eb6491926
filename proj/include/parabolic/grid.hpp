#pragma once

// Periodic tensor grids, scalar fields with physical and spectral views, and
// the spectral calculus built on them (derivatives, L2 inner products,
// multi-index Sobolev seminorms).
//
// Spectral convention: u(x) = sum_xi c(xi) exp(i kappa(xi) . x) with
// kappa = 2 pi xi / L and xi in {-N/2+1, .., N/2}^n. Coefficients are stored
// in FFT slot order (slot j holds xi = j for j <= N/2, j - N otherwise), row
// major with the last axis fastest. With this scaling c(0) is the mean and
// ||u||_2^2 = L^n sum |c(xi)|^2.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace parabolic {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxSobolevOrder = 8;

class GridSpec {
 public:
  /// Throws Error(InvalidArgument) unless 1 <= dim <= 3, points even and
  /// >= 8, and length > 0.
  GridSpec(int dim, int points, double length = 2.0 * std::numbers::pi);

  int dim() const noexcept { return dim_; }
  int points() const noexcept { return points_; }
  double length() const noexcept { return length_; }

  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return length_ / points_; }
  /// Quadrature weight h^n of one grid cell.
  double cell_volume() const noexcept;
  /// L^n.
  double volume() const noexcept;
  /// 2 pi / L.
  double wavenumber_scale() const noexcept { return 2.0 * std::numbers::pi / length_; }
  /// Largest scaled wavenumber magnitude on the lattice, sqrt(n) * (N/2) * 2pi/L.
  double max_wavenumber() const noexcept;

  /// Lattice index xi for an FFT slot on one axis.
  int lattice_index(int slot) const noexcept { return slot <= points_ / 2 ? slot : slot - points_; }
  /// FFT slot holding lattice index xi (any integer, reduced mod N).
  int slot_of(int xi) const noexcept { return ((xi % points_) + points_) % points_; }
  bool is_nyquist_slot(int slot) const noexcept { return slot == points_ / 2; }

  std::array<int, kMaxDim> unravel(std::size_t linear) const noexcept;
  std::size_t ravel(const std::array<int, kMaxDim>& slots) const noexcept;
  /// Integer lattice vector of a linear spectral index (unused axes are 0).
  std::array<int, kMaxDim> lattice(std::size_t linear) const noexcept;
  /// Physical coordinates of a linear grid index (unused axes are 0).
  std::array<double, kMaxDim> coordinate(std::size_t linear) const noexcept;

  /// Per linear index, the scaled wavenumber used by differentiation along
  /// `axis`: kappa_axis, with the Nyquist slot mapped to 0.
  std::span<const double> derivative_wavenumbers(int axis) const;

  bool operator==(const GridSpec& other) const noexcept {
    return dim_ == other.dim_ && points_ == other.points_ && length_ == other.length_;
  }

 private:
  int dim_;
  int points_;
  double length_;
  std::size_t size_;
  std::shared_ptr<const std::vector<std::vector<double>>> derivative_wavenumbers_;
};

/// Real grid function. Holds physical samples, spectral coefficients, or both;
/// the views are interconvertible with transform_forward / transform_backward.
class ScalarField {
 public:
  static ScalarField zeros(const GridSpec& grid);
  static ScalarField from_values(const GridSpec& grid, std::vector<double> values);
  /// Coefficients must be Hermitian symmetric for the field to be real; the
  /// backward transform keeps only the real part.
  static ScalarField from_spectral(const GridSpec& grid, std::vector<cplx> coefficients);

  const GridSpec& grid() const noexcept { return grid_; }
  bool has_values() const noexcept { return values_.has_value(); }
  bool has_spectral() const noexcept { return spectral_.has_value(); }

  /// Throws Error(InvalidArgument) if the view is absent.
  std::span<const double> values() const;
  std::span<const cplx> spectral() const;

 private:
  friend ScalarField transform_forward(const ScalarField&);
  friend ScalarField transform_backward(const ScalarField&);
  friend ScalarField combine(double, const ScalarField&, double, const ScalarField&);

  explicit ScalarField(GridSpec grid) : grid_(std::move(grid)) {}

  GridSpec grid_;
  std::optional<std::vector<double>> values_;
  std::optional<std::vector<cplx>> spectral_;
};

/// Samples fn at every grid point.
ScalarField sample(const GridSpec& grid,
                   const std::function<double(const std::array<double, kMaxDim>&)>& fn);

/// Returns a copy with the spectral view populated.
ScalarField transform_forward(const ScalarField& field);
/// Returns a copy with the physical view populated.
ScalarField transform_backward(const ScalarField& field);

/// Coefficients of the discrete Fourier interpolant of real samples.
std::vector<cplx> forward_coefficients(const GridSpec& grid, std::span<const double> values);
/// Real samples of a (Hermitian) coefficient array.
std::vector<double> backward_values(const GridSpec& grid, std::span<const cplx> coefficients);

/// d/dx_axis, spectrally, with the Nyquist mode zeroed. Output carries both views.
ScalarField spectral_derivative(const ScalarField& field, int axis);

/// ||grad^k u||_2^2 = sum over multi-indices |alpha| = k of ||d^alpha u||_2^2.
/// For k >= 1 the Nyquist wavenumber counts as 0, matching spectral_derivative.
/// Throws Error(InvalidArgument) for k < 0 or k > kMaxSobolevOrder.
double sobolev_norm(const ScalarField& field, int k);

/// All multi-indices alpha in N^dim with |alpha| = k, in descending lexicographic order.
std::vector<std::array<int, kMaxDim>> multi_indices(int dim, int k);

/// Per linear spectral index, sum_{|alpha|=k} prod_a kappa_a^(2 alpha_a).
std::vector<double> sobolev_multiplier(const GridSpec& grid, int k);

/// L2 inner product by trapezoidal quadrature (exact for the interpolants).
/// Throws Error(GridMismatch) for different grids.
double inner_product(const ScalarField& a, const ScalarField& b);

/// Spatial mean, i.e. the zero-mode coefficient.
double mean(const ScalarField& field);

/// Fourier interpolation onto a grid of the same dim and length. Modes that do
/// not fit on a coarser target are dropped; the Nyquist mode is not carried.
ScalarField resample(const ScalarField& field, const GridSpec& target);

/// a * x + b * y on whichever views both operands share.
ScalarField combine(double a, const ScalarField& x, double b, const ScalarField& y);

/// ||a - b||_2.
double l2_distance(const ScalarField& a, const ScalarField& b);

}  // namespace parabolic
