#pragma once

// Dense Galerkin construction on a truncated real trigonometric basis: the
// stiffness matrix A_jk = <D grad w_k, grad w_j>, the load F_j = <f, w_j>,
// and the exact solution of c' = -A c + F through the eigendecomposition of
// the symmetric A. Used as an independent oracle for the pseudospectral
// solver, together with a closed-form heat solution that shares no code with
// the solver (naive DFT, its own symbol).

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

#include "parabolic/evolution.hpp"
#include "parabolic/grid.hpp"
#include "parabolic/problem.hpp"

namespace parabolic {

inline constexpr int kMaxDenseModes = 4096;

struct BasisFunction {
  enum class Kind { Constant, Cosine, Sine };
  Kind kind = Kind::Constant;
  std::array<int, kMaxDim> wave{0, 0, 0};
};

/// First m functions of the orthonormal real trigonometric basis: the
/// constant, then cos/sin pairs ordered by |xi|^2 and lexicographically, over
/// the half lattice with first nonzero component positive, Nyquist excluded.
/// Throws Error(TooManyModes) if m exceeds what the grid represents or
/// kMaxDenseModes, Error(InvalidArgument) if m < 1.
std::vector<BasisFunction> trigonometric_basis(const GridSpec& grid, int m);

/// Samples of w on the grid, and of its gradient (one array per axis).
std::vector<double> basis_values(const GridSpec& grid, const BasisFunction& w);
std::vector<std::vector<double>> basis_gradient(const GridSpec& grid, const BasisFunction& w);

struct GalerkinSystem {
  GridSpec grid;
  std::vector<BasisFunction> basis;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd load;
  Eigen::VectorXd initial;
  /// Points per axis of the quadrature grid used for the stiffness matrix.
  int quadrature_points = 0;
};

/// Quadrature grid has max(N, 4 (K + 1)) points per axis, K the largest
/// retained |xi_a|; D is Fourier-interpolated onto it when finer than N.
GalerkinSystem assemble_system(const ProblemSpec& problem, int m);

/// c(t) = exp(-A t) c0 + t phi_1(-A t) F for each t.
std::vector<Eigen::VectorXd> solve_dense(const GalerkinSystem& system, std::span<const double> times);

/// <u, w_j> for each basis function.
Eigen::VectorXd project(const GalerkinSystem& system, const ScalarField& u);

/// sum_j c_j w_j on the system grid.
ScalarField reconstruct(const GalerkinSystem& system, const Eigen::VectorXd& coefficients);

/// Closed-form solution for D = c I at time t >= 0. Throws
/// Error(MethodMismatch) if D is not a constant multiple of the identity.
ScalarField heat_exact(const ProblemSpec& problem, double t);

/// Dense solutions for several basis sizes compared against a pseudospectral
/// reference trajectory at its sample times.
struct GalerkinStudy {
  std::vector<int> modes;
  /// max_j ||P_m u(t_j) - u_m(t_j)||, P_m the L2 projection onto the basis.
  std::vector<double> oracle_gaps;
  /// sup_j (||u_m||^2 + (theta t_j / 2) ||grad u_m||^2) / ||u0||^2.
  std::vector<double> apriori_constants;
  /// Trapezoidal integral of ||u_m||^2_{H^1} over [0, t_last], divided by
  /// ||f||^2 + ||u0||^2 (t = 0 uses the projected initial data).
  std::vector<double> integrated_constants;
  /// ||u_{m_i}(t_last) - u_{m_(i+1)}(t_last)|| for consecutive sizes.
  std::vector<double> nesting_gaps;
};

GalerkinStudy galerkin_study(const Trajectory& reference, std::span<const int> modes);

}  // namespace parabolic
