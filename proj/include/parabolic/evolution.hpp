#pragma once

// Pseudospectral time integration of d_t u = div(D grad u) + f.
//
// The discrete operator differentiates spectrally (Nyquist zeroed) and forms
// D grad u pointwise in physical space. Three integrators share it:
//   ExactExponential  per-mode closed form, D = c I only
//   SplitExponential  theta * Laplacian integrated exactly, the remainder by
//                     fourth-order exponential time differencing (ETDRK4)
//   ReferenceRK       classical RK4 on the full operator, small grids only

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "parabolic/grid.hpp"
#include "parabolic/problem.hpp"

namespace parabolic {

enum class Method { ExactExponential, SplitExponential, ReferenceRK };

std::string_view to_string(Method method);

struct IntegratorStats {
  Method method = Method::ExactExponential;
  std::size_t steps = 0;
  double max_step = 0.0;
  /// theta used for the exactly integrated part (SplitExponential), else 0.
  double splitting_constant = 0.0;
};

/// States of one solve at strictly increasing sample times in (0, T].
class Trajectory {
 public:
  /// Throws Error(InvalidArgument) unless times are strictly increasing,
  /// positive, one state per time, and all states on the problem grid.
  Trajectory(ProblemSpec problem, std::vector<double> sample_times, std::vector<ScalarField> states,
             IntegratorStats stats);

  const ProblemSpec& problem() const noexcept { return problem_; }
  std::span<const double> sample_times() const noexcept { return sample_times_; }
  std::span<const ScalarField> states() const noexcept { return states_; }
  const IntegratorStats& stats() const noexcept { return stats_; }
  std::size_t size() const noexcept { return states_.size(); }

 private:
  ProblemSpec problem_;
  std::vector<double> sample_times_;
  std::vector<ScalarField> states_;
  IntegratorStats stats_;
};

/// div(D grad u), pseudospectrally. Throws Error(GridMismatch).
ScalarField apply_operator(const DiffusionField& diffusion, const ScalarField& u);

/// safety / (||D||_inf * kappa_max^2). Throws Error(InvalidArgument) unless
/// safety is in (0, 1].
double cfl_step_size(const ProblemSpec& problem, double safety);

struct SolveOptions {
  double safety = 1.0;
  /// Abort with UnstableStep when ||u||^2 leaves the energy envelope
  /// e^t (||u0||^2 + ||f||^2) - ||f||^2.
  bool energy_guard = true;
};

/// Throws Error(MethodMismatch) for ExactExponential with non-isotropic or
/// variable D, Error(InvalidArgument) for a bad schedule, and
/// Error(UnstableStep) when the energy guard trips.
Trajectory solve(const ProblemSpec& problem, std::span<const double> sample_times, Method method,
                 const SolveOptions& options = {});

/// max_j |mean u(t_j) - mean u0 - t_j mean f|.
double mass_balance(const Trajectory& trajectory);

/// phi_k(z) = sum_j z^j / (j + k)!, for k = 0..3. Uses the series near 0.
double phi(int k, double z);

/// count points from first to last, geometric (log) or arithmetic (linear).
std::vector<double> log_schedule(double first, double last, int count);
std::vector<double> linear_schedule(double first, double last, int count);

}  // namespace parabolic
