#include "parabolic/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parabolic/errors.hpp"
#include "parabolic/evolution.hpp"
#include "parabolic/kernels.hpp"

namespace parabolic {
namespace {

using Wave = std::array<int, kMaxDim>;

bool canonical(const Wave& xi, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (xi[a] != 0) return xi[a] > 0;
  }
  return false;
}

int norm_sq(const Wave& xi) { return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]; }

// Phase kappa . x at a grid point.
double phase(const GridSpec& grid, const Wave& xi, std::size_t linear) {
  const auto x = grid.coordinate(linear);
  double p = 0.0;
  for (int a = 0; a < grid.dim(); ++a) p += xi[a] * x[a];
  return grid.wavenumber_scale() * p;
}

DiffusionField refine(const DiffusionField& d, const GridSpec& target) {
  if (d.grid() == target) return d;
  std::vector<std::vector<double>> upper;
  for (const auto& comp : d.components()) {
    const auto fine = resample(ScalarField::from_values(d.grid(), comp), target);
    const auto v = fine.values();
    upper.emplace_back(v.begin(), v.end());
  }
  return DiffusionField::from_components(target, std::move(upper));
}

// 1-D DFT along one axis of a row-major cube, O(N) per output entry.
void naive_dft_axis(std::vector<cplx>& data, int dim, int n, int axis, int sign) {
  std::vector<cplx> twiddle(n);
  for (int j = 0; j < n; ++j) twiddle[j] = std::polar(1.0, sign * 2.0 * std::numbers::pi * j / n);
  std::size_t stride = 1;
  for (int a = dim - 1; a > axis; --a) stride *= n;
  const std::size_t total = data.size();
  const std::size_t block = stride * n;
  std::vector<cplx> line(n), out(n);
  for (std::size_t outer = 0; outer < total; outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      for (int j = 0; j < n; ++j) line[j] = data[outer + inner + j * stride];
      for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (int j = 0; j < n; ++j) acc += line[j] * twiddle[(static_cast<std::size_t>(j) * k) % n];
        out[k] = acc;
      }
      for (int k = 0; k < n; ++k) data[outer + inner + k * stride] = out[k];
    }
  }
}

std::vector<cplx> naive_transform(const GridSpec& grid, std::vector<cplx> data, int sign) {
  for (int axis = 0; axis < grid.dim(); ++axis) naive_dft_axis(data, grid.dim(), grid.points(), axis, sign);
  return data;
}

}  // namespace

std::vector<BasisFunction> trigonometric_basis(const GridSpec& grid, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "basis size must be positive");
  if (m > kMaxDenseModes) throw Error(ErrorCode::TooManyModes, "basis size exceeds the dense limit");
  const int half = grid.points() / 2;
  std::vector<Wave> waves;
  Wave xi{0, 0, 0};
  const int lo = -half + 1;
  const int hi = half - 1;
  std::array<int, kMaxDim> lower{0, 0, 0}, upper{0, 0, 0};
  for (int a = 0; a < grid.dim(); ++a) {
    lower[a] = lo;
    upper[a] = hi;
  }
  for (xi[0] = lower[0]; xi[0] <= upper[0]; ++xi[0])
    for (xi[1] = lower[1]; xi[1] <= upper[1]; ++xi[1])
      for (xi[2] = lower[2]; xi[2] <= upper[2]; ++xi[2])
        if (canonical(xi, grid.dim())) waves.push_back(xi);
  if (static_cast<std::size_t>(m) > 1 + 2 * waves.size())
    throw Error(ErrorCode::TooManyModes, "basis size exceeds the modes the grid represents");
  std::sort(waves.begin(), waves.end(), [](const Wave& a, const Wave& b) {
    const int na = norm_sq(a), nb = norm_sq(b);
    return na != nb ? na < nb : a < b;
  });
  std::vector<BasisFunction> basis;
  basis.reserve(m);
  basis.push_back({});
  for (const auto& w : waves) {
    if (static_cast<int>(basis.size()) == m) break;
    basis.push_back({BasisFunction::Kind::Cosine, w});
    if (static_cast<int>(basis.size()) == m) break;
    basis.push_back({BasisFunction::Kind::Sine, w});
  }
  return basis;
}

std::vector<double> basis_values(const GridSpec& grid, const BasisFunction& w) {
  std::vector<double> out(grid.size());
  if (w.kind == BasisFunction::Kind::Constant) {
    std::fill(out.begin(), out.end(), 1.0 / std::sqrt(grid.volume()));
    return out;
  }
  const double scale = std::sqrt(2.0 / grid.volume());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = phase(grid, w.wave, i);
    out[i] = scale * (w.kind == BasisFunction::Kind::Cosine ? std::cos(p) : std::sin(p));
  }
  return out;
}

std::vector<std::vector<double>> basis_gradient(const GridSpec& grid, const BasisFunction& w) {
  std::vector<std::vector<double>> out(grid.dim(), std::vector<double>(grid.size(), 0.0));
  if (w.kind == BasisFunction::Kind::Constant) return out;
  const double scale = std::sqrt(2.0 / grid.volume());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = phase(grid, w.wave, i);
    // d/dx cos = -kappa sin, d/dx sin = kappa cos
    const double g = w.kind == BasisFunction::Kind::Cosine ? -std::sin(p) : std::cos(p);
    for (int a = 0; a < grid.dim(); ++a) out[a][i] = scale * g * grid.wavenumber_scale() * w.wave[a];
  }
  return out;
}

GalerkinSystem assemble_system(const ProblemSpec& problem, int m) {
  const GridSpec& grid = problem.grid();
  auto basis = trigonometric_basis(grid, m);
  int top = 0;
  for (const auto& w : basis)
    for (int a = 0; a < grid.dim(); ++a) top = std::max(top, std::abs(w.wave[a]));
  const int nq = std::max(grid.points(), 4 * (top + 1));
  const GridSpec quad(grid.dim(), nq, grid.length());
  const DiffusionField d = refine(problem.diffusion(), quad);
  const int n = grid.dim();

  // flux[k][a] = (D grad w_k)_a on the quadrature grid
  std::vector<std::vector<std::vector<double>>> grads(m), flux(m);
  for (int k = 0; k < m; ++k) {
    grads[k] = basis_gradient(quad, basis[k]);
    flux[k].assign(n, std::vector<double>(quad.size(), 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const auto dab = d.component(a, b);
        for (std::size_t i = 0; i < quad.size(); ++i) flux[k][a][i] += dab[i] * grads[k][b][i];
      }
  }

  GalerkinSystem sys{grid, std::move(basis), Eigen::MatrixXd::Zero(m, m), Eigen::VectorXd::Zero(m),
                     Eigen::VectorXd::Zero(m), nq};
  const double h = quad.cell_volume();
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) acc += kernels::dot(grads[j][a], flux[k][a]);
      sys.stiffness(j, k) = h * acc;
    }
  }
  const auto f = problem.forcing().values();
  const auto u0 = problem.initial().values();
  for (int j = 0; j < m; ++j) {
    const auto w = basis_values(grid, sys.basis[j]);
    sys.load(j) = grid.cell_volume() * kernels::dot(w, f);
    sys.initial(j) = grid.cell_volume() * kernels::dot(w, u0);
  }
  return sys;
}

std::vector<Eigen::VectorXd> solve_dense(const GalerkinSystem& system, std::span<const double> times) {
  const Eigen::MatrixXd a = 0.5 * (system.stiffness + system.stiffness.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
  const Eigen::MatrixXd& q = eig.eigenvectors();
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::VectorXd y0 = q.transpose() * system.initial;
  const Eigen::VectorXd g = q.transpose() * system.load;
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "times must be nonnegative");
    Eigen::VectorXd y(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double z = -lambda(i) * t;
      y(i) = std::exp(z) * y0(i) + t * phi(1, z) * g(i);
    }
    out.push_back(q * y);
  }
  return out;
}

Eigen::VectorXd project(const GalerkinSystem& system, const ScalarField& u) {
  if (!(u.grid() == system.grid)) throw Error(ErrorCode::GridMismatch, "field is not on the system grid");
  const ScalarField uv = u.has_values() ? u : transform_backward(u);
  Eigen::VectorXd c(system.basis.size());
  for (std::size_t j = 0; j < system.basis.size(); ++j) {
    const auto w = basis_values(system.grid, system.basis[j]);
    c(j) = system.grid.cell_volume() * kernels::dot(w, uv.values());
  }
  return c;
}

ScalarField reconstruct(const GalerkinSystem& system, const Eigen::VectorXd& coefficients) {
  if (static_cast<std::size_t>(coefficients.size()) != system.basis.size())
    throw Error(ErrorCode::InvalidArgument, "coefficient count does not match the basis");
  std::vector<double> out(system.grid.size(), 0.0);
  for (std::size_t j = 0; j < system.basis.size(); ++j) {
    const auto w = basis_values(system.grid, system.basis[j]);
    const double cj = coefficients(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += cj * w[i];
  }
  return ScalarField::from_values(system.grid, std::move(out));
}

ScalarField heat_exact(const ProblemSpec& problem, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "time must be nonnegative");
  const GridSpec& grid = problem.grid();
  const DiffusionField& d = problem.diffusion();
  const int n = grid.dim();
  const double c = d.component(0, 0)[0];
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (double v : d.component(a, b))
        if (v != (a == b ? c : 0.0))
          throw Error(ErrorCode::MethodMismatch, "closed form needs a constant multiple of the identity");
  if (t == 0.0) return problem.initial();

  const auto to_complex = [&](const ScalarField& f) {
    const auto v = f.values();
    return std::vector<cplx>(v.begin(), v.end());
  };
  auto u_hat = naive_transform(grid, to_complex(problem.initial()), -1);
  auto f_hat = naive_transform(grid, to_complex(problem.forcing()), -1);
  const int points = grid.points();
  const double scale = 2.0 * std::numbers::pi / grid.length();
  for (std::size_t i = 0; i < u_hat.size(); ++i) {
    std::size_t rest = i;
    double ksq = 0.0;
    for (int a = n - 1; a >= 0; --a) {
      const int slot = static_cast<int>(rest % points);
      rest /= points;
      const int xi = slot < points / 2 ? slot : (slot == points / 2 ? 0 : slot - points);
      ksq += (scale * xi) * (scale * xi);
    }
    const double lambda = c * ksq;
    const double decay = std::exp(-lambda * t);
    const double forced = lambda > 0.0 ? -std::expm1(-lambda * t) / lambda : t;
    u_hat[i] = decay * u_hat[i] + forced * f_hat[i];
  }
  const auto u = naive_transform(grid, std::move(u_hat), +1);
  std::vector<double> out(u.size());
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].real() * norm;
  return ScalarField::from_values(grid, std::move(out));
}

GalerkinStudy galerkin_study(const Trajectory& reference, std::span<const int> modes) {
  const ProblemSpec& problem = reference.problem();
  const GridSpec& grid = problem.grid();
  const auto times = reference.sample_times();
  const double theta = problem.diffusion().theta();
  const double u0_sq = sobolev_norm(problem.initial(), 0);
  const double data_sq = u0_sq + sobolev_norm(problem.forcing(), 0);

  GalerkinStudy out;
  std::vector<Eigen::VectorXd> finals;
  for (int m : modes) {
    const GalerkinSystem sys = assemble_system(problem, m);
    const auto coeffs = solve_dense(sys, times);
    std::vector<double> ksq(m);
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int a = 0; a < grid.dim(); ++a) {
        const double k = grid.wavenumber_scale() * sys.basis[j].wave[a];
        s += k * k;
      }
      ksq[j] = s;
    }
    const auto h1 = [&](const Eigen::VectorXd& c, double t_weight) {
      double l2 = 0.0, grad = 0.0;
      for (int j = 0; j < m; ++j) {
        l2 += c(j) * c(j);
        grad += ksq[j] * c(j) * c(j);
      }
      return std::pair{l2 + grad, l2 + t_weight * grad};
    };

    double gap = 0.0, apriori = 0.0, integral = 0.0;
    double prev_t = 0.0, prev_h1 = h1(sys.initial, 0.0).first;
    for (std::size_t j = 0; j < times.size(); ++j) {
      gap = std::max(gap, (project(sys, reference.states()[j]) - coeffs[j]).norm());
      const auto [h1_sq, m1] = h1(coeffs[j], 0.5 * theta * times[j]);
      if (u0_sq > 0.0) apriori = std::max(apriori, m1 / u0_sq);
      integral += 0.5 * (times[j] - prev_t) * (h1_sq + prev_h1);
      prev_t = times[j];
      prev_h1 = h1_sq;
    }
    out.modes.push_back(m);
    out.oracle_gaps.push_back(gap);
    out.apriori_constants.push_back(apriori);
    out.integrated_constants.push_back(data_sq > 0.0 ? integral / data_sq : 0.0);
    finals.push_back(coeffs.empty() ? Eigen::VectorXd() : coeffs.back());
  }
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    Eigen::VectorXd a = finals[i], b = finals[i + 1];
    const Eigen::Index n = std::max(a.size(), b.size());
    a.conservativeResize(n);
    b.conservativeResize(n);
    a.tail(n - finals[i].size()).setZero();
    b.tail(n - finals[i + 1].size()).setZero();
    out.nesting_gaps.push_back((a - b).norm());
  }
  return out;
}

}  // namespace parabolic
