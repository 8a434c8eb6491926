#pragma once

// Time series of Sobolev seminorms along a trajectory and the checks that
// compare them with the a priori estimates: power-law rate fits, the
// t^k-weighted smoothing bound, differential dissipation inequalities, the
// Gronwall bound for weighted energies, continuity in time, stability under
// perturbed data, weak-form residuals and spectral decay profiles.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "parabolic/evolution.hpp"
#include "parabolic/grid.hpp"
#include "parabolic/problem.hpp"

namespace parabolic {

struct NormSeries {
  std::vector<double> times;
  /// norms[k][j] = ||grad^k u(t_j)||^2 for k = 0..order.
  std::vector<std::vector<double>> norms;
  double theta = 0.0;
  /// ||u0||^2.
  double initial_l2_sq = 0.0;
  /// forcing_sq[k] = ||f||^2_{H^k} = sum_{i<=k} ||grad^i f||^2.
  std::vector<double> forcing_sq;
  /// initial_norms[k] = ||grad^k u0||^2 (infinite for rough data in the
  /// continuum; reported, never divided by).
  std::vector<double> initial_norms;

  int order() const noexcept { return static_cast<int>(norms.size()) - 1; }
  /// ||u(t_j)||^2_{H^k}.
  double cumulative(int k, std::size_t j) const;
};

/// Throws Error(InvalidArgument) unless 0 <= m <= kMaxSobolevOrder - 1.
NormSeries norm_series(const Trajectory& trajectory, int m);

/// Weights w_k(t) = (theta t)^k / (2^k k!) of the weighted energy functional.
std::vector<double> energy_weights(double theta, double t, int m);

/// M_1 = ||u||^2 + (theta t / 2) ||grad u||^2 and
/// M_m = sum_k w_k(t) ||grad^k u||^2, m = series order.
struct EnergySeries {
  std::vector<double> times;
  std::vector<double> m1;
  std::vector<double> mm;
  int order = 0;
  /// Both functionals equal ||u0||^2 at t = 0.
  double initial = 0.0;
};

/// Throws Error(InvalidArgument) if the series order is below 1.
EnergySeries energy_series(const NormSeries& series);

struct RateFit {
  int k = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t samples = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// exp(intercept), the fitted constant in ||grad^k u||^2 ~ C t^slope.
  double fitted_constant = 0.0;
};

/// Least-squares line through (log t, log ||grad^k u||^2) over samples in
/// [t_lo, t_hi]. Throws Error(WindowTooSparse) for fewer than 8 usable
/// samples, Error(InvalidArgument) for k outside the series.
RateFit rate_fit(const NormSeries& series, int k, double t_lo, double t_hi);

/// Predicted slope for power-law data with |c(xi)| ~ |xi|^-s under constant
/// isotropic diffusion: -(n + 2k - 2s) / 2.
double rough_data_slope(int dim, int k, double decay);

struct SmoothingBound {
  int k = 0;
  /// sup over the window of t^k ||grad^k u||^2 / (||u0||^2 + ||f||^2_{H^k}).
  double fitted_constant = 0.0;
  double argmax_time = 0.0;
  /// Log-log slope of the ratio over the leftmost quarter of the window.
  double left_slope = 0.0;
  /// Holds when the ratio does not blow up as t -> 0: left_slope >= -0.05.
  bool passed = false;
};

SmoothingBound check_smoothing_bound(const NormSeries& series, int k,
                                     std::optional<std::pair<double, double>> window = std::nullopt);

struct DissipationReport {
  /// constants[k] = smallest C >= 0 with
  /// 1/2 d/dt ||grad^k u||^2 + c_k theta ||grad^(k+1) u||^2 <= C (||f||^2_{H^k} + ||u||^2_{H^k})
  /// at interior samples (c_0 = 1, c_k = 1/2 otherwise), derivatives by
  /// centered finite differences.
  std::vector<double> constants;
  double max_constant = 0.0;
  bool feasible_with_zero = false;
};

/// Checks orders k = 0..series.order(); the order k+1 norm at the top comes
/// from the trajectory. Needs at least 3 samples.
DissipationReport check_dissipation(const NormSeries& series, const Trajectory& trajectory);

/// Minimal C >= 0 with values[j] <= e^(C t_j) (initial + data) - data, by
/// bisection on [0, 1e3] to 1e-6. Throws Error(Infeasible) if 1e3 fails.
double minimal_gronwall_constant(std::span<const double> times, std::span<const double> values,
                                 double initial, double data);

struct GronwallFit {
  double m1_constant = 0.0;
  double mm_constant = 0.0;
};

/// data = B, normally ||f||^2_{H^m}.
GronwallFit check_gronwall(const EnergySeries& energy, double data);

struct ContinuityReport {
  double time = 0.0;
  std::vector<double> shifts;
  /// ||u(t+s) - u(t)|| and ||grad(u(t+s) - u(t))||.
  std::vector<double> l2_defects;
  std::vector<double> gradient_defects;
  /// defect[i+1] / defect[i].
  std::vector<double> l2_ratios;
  std::vector<double> gradient_ratios;
};

/// Solves once with samples at t and every t + s.
ContinuityReport check_continuity(const ProblemSpec& problem, double t, std::span<const double> shifts,
                                  Method method, const SolveOptions& options = {});

struct StabilityReport {
  std::vector<double> times;
  /// ||u_a(t_j) - u_b(t_j)||.
  std::vector<double> defects;
  double initial_defect = 0.0;
  /// Minimal Gronwall constant of the squared defect with zero data.
  double gronwall_constant = 0.0;
  /// Every defect <= initial defect (1 + 1e-10): the constant-D bound.
  bool contractive = false;
  bool nonincreasing = false;
};

/// Solves the problem from its own and from the perturbed initial data.
StabilityReport check_uniqueness_stability(const ProblemSpec& problem, const ScalarField& perturbed_initial,
                                           std::span<const double> times, Method method,
                                           const SolveOptions& options = {});

struct WeakResidual {
  /// max over interior samples and test functions of
  /// |<d_t u, w> + <D grad u, grad w> - <f, w>| / (||u0|| + ||f||).
  double max_residual = 0.0;
  std::size_t test_functions = 0;
  std::size_t samples = 0;
};

/// Test functions are the first test_modes real trigonometric basis
/// functions; d_t u by centered differences.
WeakResidual residual_weak_form(const Trajectory& trajectory, int test_modes);

/// Same problem and times with the states in a seeded shuffled order (never
/// the identity); its weak residual is large.
Trajectory shuffled_control(const Trajectory& trajectory, std::uint64_t seed);

struct DecayProfile {
  /// amplitude[r] = mean |c(xi)| over lattice points with round(|xi|) = r
  /// (Nyquist excluded).
  std::vector<double> amplitude;
  std::vector<std::size_t> counts;
};

DecayProfile spectral_decay_profile(const ScalarField& state);

/// Smallest shell r* >= 1 such that later <= earlier (1 + rel_tol) + floor on
/// every shell >= r*; nullopt if the last shell is not dominated.
std::optional<int> dominance_crossover(const DecayProfile& later, const DecayProfile& earlier,
                                       double rel_tol = 1e-9, double floor = 1e-300);

/// Least-squares slope of -log(later / earlier) against (2 pi r / L)^2 over
/// shells [lo, hi], i.e. the Gaussian damping rate c t for heat flow.
double gaussian_rate(const DecayProfile& later, const DecayProfile& earlier, int lo, int hi, double length);

/// Least-squares slope of log amplitude against log r over shells [lo, hi].
double power_law_slope(const DecayProfile& profile, int lo, int hi);

}  // namespace parabolic
