#pragma once

// Problem instances for d_t u - div(D(x) grad u) = f(x) on the periodic box:
// diffusion fields with a certified ellipticity constant, stock forcing and
// initial data, and the power-law "rough" initial data used to probe
// smoothing from L2 data.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parabolic/grid.hpp"

namespace parabolic {

/// Symmetric matrix at one point, row-major; only the leading dim x dim block is used.
using Matrix3 = std::array<double, 9>;

class DiffusionField {
 public:
  /// Samples fn at every grid point. Throws Error(InvalidArgument) if a sample
  /// is not symmetric and Error(NotElliptic) if some eigenvalue is <= 0.
  static DiffusionField from_function(const GridSpec& grid,
                                      const std::function<Matrix3(const std::array<double, kMaxDim>&)>& fn);

  /// Upper-triangle component arrays in row order (d00, d01, .., d11, ..).
  static DiffusionField from_components(const GridSpec& grid, std::vector<std::vector<double>> upper);

  const GridSpec& grid() const noexcept { return grid_; }
  /// Grid minimum of the smallest eigenvalue.
  double theta() const noexcept { return theta_; }
  /// Grid maximum of the largest eigenvalue (the sup of the spectral norm).
  double sup_norm() const noexcept { return sup_norm_; }

  int component_count() const noexcept { return static_cast<int>(components_.size()); }
  /// Component (row, col) in either order.
  std::span<const double> component(int row, int col) const;
  /// Upper-triangle components in storage order.
  const std::vector<std::vector<double>>& components() const noexcept { return components_; }

  Matrix3 at(std::size_t linear) const;

  /// c if D = c I at every grid point, nullopt otherwise.
  std::optional<double> constant_isotropic() const;

 private:
  DiffusionField(GridSpec grid, std::vector<std::vector<double>> upper);

  GridSpec grid_;
  std::vector<std::vector<double>> components_;
  double theta_ = 0.0;
  double sup_norm_ = 0.0;
};

/// Uniform ellipticity constant: min over grid points of the smallest
/// eigenvalue of D(x). Throws Error(NotElliptic) if that minimum is <= 0.
double ellipticity_theta(const DiffusionField& diffusion);

/// Smallest and largest eigenvalue of the leading dim x dim block.
std::pair<double, double> eigen_range(const Matrix3& m, int dim);

class ProblemSpec {
 public:
  /// Throws Error(GridMismatch) unless all fields share one grid and
  /// Error(InvalidArgument) unless horizon > 0.
  ProblemSpec(DiffusionField diffusion, ScalarField forcing, ScalarField initial, double horizon);

  const GridSpec& grid() const noexcept { return diffusion_.grid(); }
  const DiffusionField& diffusion() const noexcept { return diffusion_; }
  /// Both views populated.
  const ScalarField& forcing() const noexcept { return forcing_; }
  const ScalarField& initial() const noexcept { return initial_; }
  double horizon() const noexcept { return horizon_; }

  ProblemSpec with_initial(ScalarField initial) const;
  ProblemSpec with_horizon(double horizon) const;

 private:
  DiffusionField diffusion_;
  ScalarField forcing_;
  ScalarField initial_;
  double horizon_;
};

/// Counter-based splittable random stream (splitmix64). Splitting by a key
/// gives an independent stream, so per-mode draws do not depend on the order
/// or number of other draws.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  SeedStream split(std::uint64_t key) const;

 private:
  std::uint64_t state_;
};

/// Power-law spectrum |c(xi)| = amplitude |xi|^-decay with random phases.
struct RoughDataSpec {
  double decay = 0.75;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
  /// Zero-mode value (the field mean).
  double mean = 0.0;
};

/// Real field with the prescribed spectral profile on every non-Nyquist lattice
/// point. The phase of each mode depends only on (seed, xi), so refining the
/// grid keeps the common modes. Throws Error(DecayTooSmall) if decay <= dim/2.
ScalarField rough_data_sampler(const RoughDataSpec& spec, const GridSpec& grid);

/// f = -div(D grad u_target), so that u_target is a steady state.
ScalarField manufactured_steady(const DiffusionField& diffusion, const ScalarField& u_target);

// Stock diffusion fields. Coordinates enter through 2 pi x / L so every
// field is periodic on the box.

/// c I. Throws Error(NotElliptic) for c <= 0.
DiffusionField isotropic_diffusion(const GridSpec& grid, double c);
/// diag(d_0, .., d_{n-1}); diag.size() must equal the dimension.
DiffusionField diagonal_diffusion(const GridSpec& grid, std::span<const double> diag);
/// 1-D: a + b sin(x). theta = a - |b| when N is divisible by 4.
DiffusionField sine_diffusion(const GridSpec& grid, double a, double b);
/// n >= 2: (a + b prod_i sin x_i) I + c v v^T with v = (1, .., 1)/sqrt(n), c >= 0.
DiffusionField modulated_diffusion(const GridSpec& grid, double a, double b, double c);

// Stock scalar fields.

/// amplitude * sin(kappa . x) (or cos) for an integer wave vector.
ScalarField mode_field(const GridSpec& grid, std::span<const int> wave, double amplitude,
                       bool cosine = false);
/// sum over axes of sin x + 0.5 cos(2x + 0.3) + 0.25 sin(3x + 1.1).
ScalarField multimode_field(const GridSpec& grid);
/// prod over axes of the Poisson kernel (1 - r^2)/(1 - 2 r cos x + r^2), whose
/// coefficients are exactly r^|xi|_1. Requires 0 <= r < 1.
ScalarField poisson_field(const GridSpec& grid, double r);
ScalarField constant_field(const GridSpec& grid, double value);

}  // namespace parabolic
