#include "parabolic/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "parabolic/errors.hpp"
#include "parabolic/evolution.hpp"

namespace parabolic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int upper_index(int row, int col, int dim) {
  if (row > col) std::swap(row, col);
  // Offset of row r in packed upper storage: r*dim - r*(r-1)/2.
  return row * dim - row * (row - 1) / 2 + (col - row);
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t lattice_key(const std::array<int, kMaxDim>& xi) {
  constexpr std::int64_t kOffset = 1 << 20;
  std::uint64_t key = 0;
  for (int v : xi) key = (key << 21) | static_cast<std::uint64_t>(v + kOffset);
  return key;
}

}  // namespace

std::pair<double, double> eigen_range(const Matrix3& m, int dim) {
  switch (dim) {
    case 1:
      return {m[0], m[0]};
    case 2: {
      const double half_trace = 0.5 * (m[0] + m[4]);
      const double half_gap = 0.5 * (m[0] - m[4]);
      const double r = std::hypot(half_gap, m[1]);
      return {half_trace - r, half_trace + r};
    }
    default: {
      Eigen::Matrix3d a;
      a << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(a, Eigen::EigenvaluesOnly);
      return {solver.eigenvalues()(0), solver.eigenvalues()(2)};
    }
  }
}

DiffusionField::DiffusionField(GridSpec grid, std::vector<std::vector<double>> upper)
    : grid_(std::move(grid)), components_(std::move(upper)) {
  const int dim = grid_.dim();
  if (static_cast<int>(components_.size()) != dim * (dim + 1) / 2) {
    throw Error(ErrorCode::InvalidArgument, "diffusion needs dim*(dim+1)/2 component arrays");
  }
  for (const auto& c : components_) {
    if (c.size() != grid_.size()) {
      throw Error(ErrorCode::InvalidArgument, "diffusion component size does not match grid");
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const auto [emin, emax] = eigen_range(at(i), dim);
    if (!std::isfinite(emin) || !std::isfinite(emax)) {
      throw Error(ErrorCode::InvalidArgument, "diffusion entries must be finite");
    }
    lo = std::min(lo, emin);
    hi = std::max(hi, emax);
  }
  if (!(lo > 0.0)) {
    throw Error(ErrorCode::NotElliptic,
                "smallest eigenvalue of D(x) on the grid is " + std::to_string(lo));
  }
  theta_ = lo;
  sup_norm_ = hi;
}

DiffusionField DiffusionField::from_function(
    const GridSpec& grid, const std::function<Matrix3(const std::array<double, kMaxDim>&)>& fn) {
  const int dim = grid.dim();
  std::vector<std::vector<double>> upper(static_cast<std::size_t>(dim * (dim + 1) / 2),
                                         std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Matrix3 m = fn(grid.coordinate(i));
    for (int r = 0; r < dim; ++r) {
      for (int c = r; c < dim; ++c) {
        const double upper_value = m[static_cast<std::size_t>(3 * r + c)];
        const double lower_value = m[static_cast<std::size_t>(3 * c + r)];
        const double scale = std::max({1.0, std::fabs(upper_value), std::fabs(lower_value)});
        if (std::fabs(upper_value - lower_value) > 1e-14 * scale) {
          throw Error(ErrorCode::InvalidArgument, "D(x) is not symmetric at grid point " +
                                                      std::to_string(i));
        }
        upper[static_cast<std::size_t>(upper_index(r, c, dim))][i] = upper_value;
      }
    }
  }
  return DiffusionField(grid, std::move(upper));
}

DiffusionField DiffusionField::from_components(const GridSpec& grid,
                                               std::vector<std::vector<double>> upper) {
  return DiffusionField(grid, std::move(upper));
}

std::span<const double> DiffusionField::component(int row, int col) const {
  const int dim = grid_.dim();
  if (row < 0 || col < 0 || row >= dim || col >= dim) {
    throw Error(ErrorCode::InvalidAxis, "diffusion component index out of range");
  }
  return components_[static_cast<std::size_t>(upper_index(row, col, dim))];
}

Matrix3 DiffusionField::at(std::size_t linear) const {
  Matrix3 m{};
  const int dim = grid_.dim();
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      m[static_cast<std::size_t>(3 * r + c)] =
          components_[static_cast<std::size_t>(upper_index(r, c, dim))][linear];
    }
  }
  return m;
}

std::optional<double> DiffusionField::constant_isotropic() const {
  const int dim = grid_.dim();
  const double c = components_[0][0];
  for (int r = 0; r < dim; ++r) {
    for (int col = r; col < dim; ++col) {
      const double expected = r == col ? c : 0.0;
      for (double v : components_[static_cast<std::size_t>(upper_index(r, col, dim))]) {
        if (v != expected) return std::nullopt;
      }
    }
  }
  return c;
}

double ellipticity_theta(const DiffusionField& diffusion) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < diffusion.grid().size(); ++i) {
    lo = std::min(lo, eigen_range(diffusion.at(i), diffusion.grid().dim()).first);
  }
  if (!(lo > 0.0)) {
    throw Error(ErrorCode::NotElliptic, "minimum eigenvalue " + std::to_string(lo) + " <= 0");
  }
  return lo;
}

ProblemSpec::ProblemSpec(DiffusionField diffusion, ScalarField forcing, ScalarField initial,
                         double horizon)
    : diffusion_(std::move(diffusion)),
      forcing_(std::move(forcing)),
      initial_(std::move(initial)),
      horizon_(horizon) {
  if (!(forcing_.grid() == diffusion_.grid()) || !(initial_.grid() == diffusion_.grid())) {
    throw Error(ErrorCode::GridMismatch, "diffusion, forcing and initial data must share a grid");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be positive and finite");
  }
  forcing_ = transform_backward(transform_forward(forcing_));
  initial_ = transform_backward(transform_forward(initial_));
}

ProblemSpec ProblemSpec::with_initial(ScalarField initial) const {
  return ProblemSpec(diffusion_, forcing_, std::move(initial), horizon_);
}

ProblemSpec ProblemSpec::with_horizon(double horizon) const {
  return ProblemSpec(diffusion_, forcing_, initial_, horizon);
}

std::uint64_t SeedStream::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double SeedStream::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SeedStream SeedStream::split(std::uint64_t key) const {
  return SeedStream(mix64(state_ ^ mix64(key + 0x9E3779B97F4A7C15ULL)));
}

ScalarField rough_data_sampler(const RoughDataSpec& spec, const GridSpec& grid) {
  const double min_decay = 0.5 * grid.dim();
  if (!(spec.decay > min_decay)) {
    throw Error(ErrorCode::DecayTooSmall, "decay " + std::to_string(spec.decay) +
                                              " must exceed dim/2 = " + std::to_string(min_decay));
  }
  std::vector<cplx> c(grid.size(), cplx(0.0, 0.0));
  c[0] = cplx(spec.mean, 0.0);
  const SeedStream root(spec.seed);
  if (spec.amplitude != 0.0) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const auto slots = grid.unravel(i);
      bool nyquist = false;
      for (int a = 0; a < grid.dim(); ++a) nyquist |= grid.is_nyquist_slot(slots[static_cast<std::size_t>(a)]);
      if (nyquist) continue;
      const auto xi = grid.lattice(i);
      // Canonical half: first nonzero component positive.
      int lead = 0;
      for (int a = 0; a < grid.dim() && lead == 0; ++a) lead = xi[static_cast<std::size_t>(a)];
      if (lead < 0) continue;

      double norm_sq = 0.0;
      for (int a = 0; a < grid.dim(); ++a) {
        norm_sq += static_cast<double>(xi[static_cast<std::size_t>(a)]) * xi[static_cast<std::size_t>(a)];
      }
      const double modulus = spec.amplitude * std::pow(norm_sq, -0.5 * spec.decay);
      const double phase = kTwoPi * root.split(lattice_key(xi)).uniform();
      const cplx value = std::polar(modulus, phase);

      std::array<int, kMaxDim> mirror{0, 0, 0};
      for (int a = 0; a < grid.dim(); ++a) {
        mirror[static_cast<std::size_t>(a)] = grid.slot_of(-xi[static_cast<std::size_t>(a)]);
      }
      c[i] = value;
      c[grid.ravel(mirror)] = std::conj(value);
    }
  }
  return transform_backward(ScalarField::from_spectral(grid, std::move(c)));
}

ScalarField manufactured_steady(const DiffusionField& diffusion, const ScalarField& u_target) {
  const ScalarField div = apply_operator(diffusion, u_target);
  return combine(-1.0, div, 0.0, div);
}

DiffusionField isotropic_diffusion(const GridSpec& grid, double c) {
  return diagonal_diffusion(grid, std::vector<double>(static_cast<std::size_t>(grid.dim()), c));
}

DiffusionField diagonal_diffusion(const GridSpec& grid, std::span<const double> diag) {
  const int dim = grid.dim();
  if (static_cast<int>(diag.size()) != dim) {
    throw Error(ErrorCode::InvalidArgument, "diagonal diffusion needs one entry per axis");
  }
  std::vector<std::vector<double>> upper;
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      upper.emplace_back(grid.size(), r == c ? diag[static_cast<std::size_t>(r)] : 0.0);
    }
  }
  return DiffusionField::from_components(grid, std::move(upper));
}

DiffusionField sine_diffusion(const GridSpec& grid, double a, double b) {
  if (grid.dim() != 1) throw Error(ErrorCode::InvalidArgument, "sine diffusion is 1-D only");
  const double scale = grid.wavenumber_scale();
  return DiffusionField::from_function(grid, [&](const std::array<double, kMaxDim>& x) {
    Matrix3 m{};
    m[0] = a + b * std::sin(scale * x[0]);
    return m;
  });
}

DiffusionField modulated_diffusion(const GridSpec& grid, double a, double b, double c) {
  const int dim = grid.dim();
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "modulated diffusion needs dim >= 2");
  if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "rank-one weight must be nonnegative");
  const double scale = grid.wavenumber_scale();
  const double outer = c / dim;  // c v v^T with v = ones / sqrt(dim)
  return DiffusionField::from_function(grid, [&](const std::array<double, kMaxDim>& x) {
    double modulation = b;
    for (int i = 0; i < dim; ++i) modulation *= std::sin(scale * x[static_cast<std::size_t>(i)]);
    Matrix3 m{};
    for (int r = 0; r < dim; ++r) {
      for (int col = 0; col < dim; ++col) {
        m[static_cast<std::size_t>(3 * r + col)] = outer + (r == col ? a + modulation : 0.0);
      }
    }
    return m;
  });
}

ScalarField mode_field(const GridSpec& grid, std::span<const int> wave, double amplitude,
                       bool cosine) {
  if (static_cast<int>(wave.size()) != grid.dim()) {
    throw Error(ErrorCode::InvalidArgument, "wave vector length must equal the dimension");
  }
  for (int w : wave) {
    if (2 * std::abs(w) >= grid.points()) {
      throw Error(ErrorCode::InvalidArgument, "wave vector not representable below Nyquist");
    }
  }
  const double scale = grid.wavenumber_scale();
  return sample(grid, [&](const std::array<double, kMaxDim>& x) {
    double phase = 0.0;
    for (std::size_t a = 0; a < wave.size(); ++a) phase += scale * wave[a] * x[a];
    return amplitude * (cosine ? std::cos(phase) : std::sin(phase));
  });
}

ScalarField multimode_field(const GridSpec& grid) {
  const double scale = grid.wavenumber_scale();
  const int dim = grid.dim();
  return sample(grid, [&](const std::array<double, kMaxDim>& x) {
    double sum = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double y = scale * x[static_cast<std::size_t>(a)];
      sum += std::sin(y) + 0.5 * std::cos(2.0 * y + 0.3) + 0.25 * std::sin(3.0 * y + 1.1);
    }
    return sum;
  });
}

ScalarField poisson_field(const GridSpec& grid, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "Poisson radius must be in [0, 1)");
  const double scale = grid.wavenumber_scale();
  const int dim = grid.dim();
  return sample(grid, [&](const std::array<double, kMaxDim>& x) {
    double prod = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double y = scale * x[static_cast<std::size_t>(a)];
      prod *= (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(y) + r * r);
    }
    return prod;
  });
}

ScalarField constant_field(const GridSpec& grid, double value) {
  return ScalarField::from_values(grid, std::vector<double>(grid.size(), value));
}

}  // namespace parabolic
