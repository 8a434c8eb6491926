#include "parabolic/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "diffusion_operator.hpp"
#include "parabolic/errors.hpp"
#include "parabolic/kernels.hpp"

namespace parabolic {

namespace {

void validate_schedule(std::span<const double> times, double horizon) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "sample schedule is empty");
  if (!(times.front() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample times must be > 0");
  }
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be strictly increasing");
    }
  }
  if (times.back() > horizon * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "sample time " + std::to_string(times.back()) +
                                                " beyond horizon " + std::to_string(horizon));
  }
}

ScalarField state_from(const GridSpec& grid, std::vector<cplx> coefficients) {
  return transform_backward(ScalarField::from_spectral(grid, std::move(coefficients)));
}

double energy(const GridSpec& grid, std::span<const cplx> c, std::span<const double> ones) {
  return grid.volume() * kernels::weighted_energy(c, ones);
}

// Tracks the bound g(t) = ||u||^2 + ||f||^2 <= e^t g(0), which follows from
// the L2 estimate for any uniformly elliptic D.
class EnergyGuard {
 public:
  EnergyGuard(const ProblemSpec& problem, bool enabled)
      : grid_(problem.grid()), ones_(problem.grid().size(), 1.0), enabled_(enabled) {
    forcing_sq_ = energy(grid_, problem.forcing().spectral(), ones_);
    start_ = energy(grid_, problem.initial().spectral(), ones_) + forcing_sq_;
  }

  void check(std::span<const cplx> u, double t) const {
    if (!enabled_) return;
    const double e = energy(grid_, u, ones_);
    const double bound = std::exp(t) * start_ - forcing_sq_;
    if (!std::isfinite(e) || e > bound * (1.0 + 1e-8) + 1e-300) {
      throw Error(ErrorCode::UnstableStep, "||u||^2 = " + std::to_string(e) +
                                               " exceeds energy envelope " + std::to_string(bound) +
                                               " at t = " + std::to_string(t));
    }
  }

 private:
  GridSpec grid_;
  std::vector<double> ones_;
  bool enabled_;
  double forcing_sq_ = 0.0;
  double start_ = 0.0;
};

std::size_t steps_for(double span, double max_step) {
  const double ratio = span / max_step;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-12)));
}

Trajectory solve_exact(const ProblemSpec& problem, std::span<const double> times) {
  const auto c = problem.diffusion().constant_isotropic();
  if (!c) {
    throw Error(ErrorCode::MethodMismatch, "ExactExponential requires D = c I with constant c");
  }
  const GridSpec& grid = problem.grid();
  const std::size_t n = grid.size();
  std::vector<double> lambda(n, 0.0);
  for (int a = 0; a < grid.dim(); ++a) {
    const auto k = grid.derivative_wavenumbers(a);
    for (std::size_t i = 0; i < n; ++i) lambda[i] += *c * k[i] * k[i];
  }
  const auto u0 = problem.initial().spectral();
  const auto f = problem.forcing().spectral();

  std::vector<ScalarField> states;
  std::vector<double> decay(n), load(n);
  for (double t : times) {
    for (std::size_t i = 0; i < n; ++i) {
      const double z = -lambda[i] * t;
      decay[i] = std::exp(z);
      load[i] = t * phi(1, z);
    }
    std::vector<cplx> u(n);
    kernels::diag_scale(decay, u0, u);
    kernels::diag_axpy(load, f, u);
    states.push_back(state_from(grid, std::move(u)));
  }
  IntegratorStats stats;
  stats.method = Method::ExactExponential;
  return Trajectory(problem, {times.begin(), times.end()}, std::move(states), stats);
}

// Fourth-order exponential time differencing (Cox-Matthews) for
// u' = Lambda u + R(u), Lambda = theta * Laplacian symbol, R the remainder.
class SplitStepper {
 public:
  SplitStepper(const ProblemSpec& problem, double theta)
      : op_(problem.diffusion()),
        n_(problem.grid().size()),
        lambda_(op_.laplacian_symbol(theta)),
        minus_lambda_(n_),
        forcing_(problem.forcing().spectral().begin(), problem.forcing().spectral().end()),
        nu_(n_), na_(n_), nb_(n_), nc_(n_), a_(n_), b_(n_), c_(n_), tmp_(n_) {
    for (std::size_t i = 0; i < n_; ++i) minus_lambda_[i] = -lambda_[i];
  }

  void set_step(double h) {
    if (h == step_) return;
    step_ = h;
    e_.resize(n_);
    e2_.resize(n_);
    q_.resize(n_);
    f1_.resize(n_);
    f2x2_.resize(n_);
    f3_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double z = h * lambda_[i];
      const double p1 = phi(1, z), p2 = phi(2, z), p3 = phi(3, z);
      e_[i] = std::exp(z);
      e2_[i] = std::exp(0.5 * z);
      q_[i] = 0.5 * h * phi(1, 0.5 * z);
      f1_[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
      f2x2_[i] = 2.0 * h * (p2 - 2.0 * p3);
      f3_[i] = h * (-p2 + 4.0 * p3);
    }
  }

  void step(std::vector<cplx>& u) {
    remainder(u, nu_);
    kernels::diag_scale(e2_, u, a_);
    kernels::diag_axpy(q_, nu_, a_);
    remainder(a_, na_);
    kernels::diag_scale(e2_, u, b_);
    kernels::diag_axpy(q_, na_, b_);
    remainder(b_, nb_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = 2.0 * nb_[i] - nu_[i];
    kernels::diag_scale(e2_, a_, c_);
    kernels::diag_axpy(q_, tmp_, c_);
    remainder(c_, nc_);

    kernels::diag_scale(e_, u, tmp_);
    kernels::diag_axpy(f1_, nu_, tmp_);
    for (std::size_t i = 0; i < n_; ++i) na_[i] += nb_[i];
    kernels::diag_axpy(f2x2_, na_, tmp_);
    kernels::diag_axpy(f3_, nc_, tmp_);
    u.swap(tmp_);
  }

 private:
  // R(u) = div(D grad u) - Lambda u + f
  void remainder(std::span<const cplx> u, std::span<cplx> out) {
    op_.apply(u, out);
    kernels::diag_axpy(minus_lambda_, u, out);
    for (std::size_t i = 0; i < n_; ++i) out[i] += forcing_[i];
  }

  detail::DiffusionOperator op_;
  std::size_t n_;
  std::vector<double> lambda_;
  std::vector<double> minus_lambda_;
  std::vector<cplx> forcing_;
  double step_ = -1.0;
  std::vector<double> e_, e2_, q_, f1_, f2x2_, f3_;
  std::vector<cplx> nu_, na_, nb_, nc_, a_, b_, c_, tmp_;
};

class RungeKuttaStepper {
 public:
  explicit RungeKuttaStepper(const ProblemSpec& problem)
      : op_(problem.diffusion()),
        n_(problem.grid().size()),
        forcing_(problem.forcing().spectral().begin(), problem.forcing().spectral().end()),
        k1_(n_), k2_(n_), k3_(n_), k4_(n_), stage_(n_) {}

  void step(std::vector<cplx>& u, double h) {
    rhs(u, k1_);
    for (std::size_t i = 0; i < n_; ++i) stage_[i] = u[i] + 0.5 * h * k1_[i];
    rhs(stage_, k2_);
    for (std::size_t i = 0; i < n_; ++i) stage_[i] = u[i] + 0.5 * h * k2_[i];
    rhs(stage_, k3_);
    for (std::size_t i = 0; i < n_; ++i) stage_[i] = u[i] + h * k3_[i];
    rhs(stage_, k4_);
    for (std::size_t i = 0; i < n_; ++i) {
      u[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  void rhs(std::span<const cplx> u, std::span<cplx> out) {
    op_.apply(u, out);
    for (std::size_t i = 0; i < n_; ++i) out[i] += forcing_[i];
  }

  detail::DiffusionOperator op_;
  std::size_t n_;
  std::vector<cplx> forcing_;
  std::vector<cplx> k1_, k2_, k3_, k4_, stage_;
};

template <typename StepFn>
Trajectory march(const ProblemSpec& problem, std::span<const double> times, double max_step,
                 IntegratorStats stats, bool guard_enabled, StepFn&& step) {
  const GridSpec& grid = problem.grid();
  const EnergyGuard guard(problem, guard_enabled);
  auto init = problem.initial().spectral();
  std::vector<cplx> u(init.begin(), init.end());
  std::vector<ScalarField> states;
  double t = 0.0;
  for (double target : times) {
    const std::size_t count = steps_for(target - t, max_step);
    const double h = (target - t) / static_cast<double>(count);
    stats.max_step = std::max(stats.max_step, h);
    for (std::size_t s = 0; s < count; ++s) {
      step(u, h);
      guard.check(u, t + static_cast<double>(s + 1) * h);
    }
    stats.steps += count;
    t = target;
    states.push_back(state_from(grid, u));
  }
  return Trajectory(problem, {times.begin(), times.end()}, std::move(states), stats);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::ExactExponential:
      return "exact";
    case Method::SplitExponential:
      return "split";
    case Method::ReferenceRK:
      return "rk4";
  }
  return "unknown";
}

Trajectory::Trajectory(ProblemSpec problem, std::vector<double> sample_times,
                       std::vector<ScalarField> states, IntegratorStats stats)
    : problem_(std::move(problem)),
      sample_times_(std::move(sample_times)),
      states_(std::move(states)),
      stats_(stats) {
  if (states_.size() != sample_times_.size()) {
    throw Error(ErrorCode::InvalidArgument, "one state per sample time required");
  }
  for (std::size_t j = 0; j < sample_times_.size(); ++j) {
    if (!(sample_times_[j] > 0.0) || (j > 0 && !(sample_times_[j] > sample_times_[j - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be positive and strictly increasing");
    }
    if (!(states_[j].grid() == problem_.grid())) {
      throw Error(ErrorCode::GridMismatch, "trajectory state on a foreign grid");
    }
  }
}

ScalarField apply_operator(const DiffusionField& diffusion, const ScalarField& u) {
  if (!(diffusion.grid() == u.grid())) {
    throw Error(ErrorCode::GridMismatch, "operator and field grids differ");
  }
  const ScalarField spectral = transform_forward(u);
  std::vector<cplx> out(u.grid().size());
  detail::DiffusionOperator op(diffusion);
  op.apply(spectral.spectral(), out);
  return state_from(u.grid(), std::move(out));
}

double cfl_step_size(const ProblemSpec& problem, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "safety factor must be in (0, 1]");
  }
  const double kmax = problem.grid().max_wavenumber();
  return safety / (problem.diffusion().sup_norm() * kmax * kmax);
}

Trajectory solve(const ProblemSpec& problem, std::span<const double> sample_times, Method method,
                 const SolveOptions& options) {
  validate_schedule(sample_times, problem.horizon());
  switch (method) {
    case Method::ExactExponential:
      return solve_exact(problem, sample_times);
    case Method::SplitExponential: {
      const double theta = problem.diffusion().theta();
      IntegratorStats stats;
      stats.method = method;
      stats.splitting_constant = theta;
      SplitStepper stepper(problem, theta);
      return march(problem, sample_times, cfl_step_size(problem, options.safety), stats,
                   options.energy_guard, [&](std::vector<cplx>& u, double h) {
                     stepper.set_step(h);
                     stepper.step(u);
                   });
    }
    case Method::ReferenceRK: {
      IntegratorStats stats;
      stats.method = method;
      RungeKuttaStepper stepper(problem);
      return march(problem, sample_times, 0.25 * cfl_step_size(problem, options.safety), stats,
                   options.energy_guard,
                   [&](std::vector<cplx>& u, double h) { stepper.step(u, h); });
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown integration method");
}

double mass_balance(const Trajectory& trajectory) {
  const double m0 = mean(trajectory.problem().initial());
  const double mf = mean(trajectory.problem().forcing());
  double defect = 0.0;
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const double t = trajectory.sample_times()[j];
    defect = std::max(defect, std::fabs(mean(trajectory.states()[j]) - m0 - t * mf));
  }
  return defect;
}

double phi(int k, double z) {
  if (k < 0 || k > 3) throw Error(ErrorCode::InvalidArgument, "phi order must be 0..3");
  if (std::fabs(z) < 1.0) {
    // sum_j z^j / (j+k)!; 30 terms is far below rounding for |z| < 1.
    double factorial = 1.0;
    for (int j = 2; j <= k; ++j) factorial *= j;
    double term = 1.0 / factorial;
    double sum = term;
    for (int j = 1; j < 30; ++j) {
      term *= z / static_cast<double>(j + k);
      sum += term;
    }
    return sum;
  }
  double value = std::exp(z);
  double factorial = 1.0;
  for (int j = 0; j < k; ++j) {
    if (j > 0) factorial *= j;
    value = (value - 1.0 / factorial) / z;
  }
  return value;
}

std::vector<double> log_schedule(double first, double last, int count) {
  if (!(first > 0.0) || !(last > first) || count < 2) {
    throw Error(ErrorCode::InvalidArgument, "log schedule needs 0 < first < last and count >= 2");
  }
  std::vector<double> t(static_cast<std::size_t>(count));
  const double ratio = std::log(last / first);
  for (int j = 0; j < count; ++j) {
    t[static_cast<std::size_t>(j)] = first * std::exp(ratio * j / (count - 1));
  }
  t.front() = first;
  t.back() = last;
  return t;
}

std::vector<double> linear_schedule(double first, double last, int count) {
  if (!(first > 0.0) || !(last > first) || count < 2) {
    throw Error(ErrorCode::InvalidArgument, "linear schedule needs 0 < first < last and count >= 2");
  }
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    t[static_cast<std::size_t>(j)] = first + (last - first) * j / (count - 1);
  }
  t.back() = last;
  return t;
}

}  // namespace parabolic
