#include "parabolic/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "parabolic/errors.hpp"
#include "parabolic/galerkin.hpp"
#include "parabolic/kernels.hpp"

namespace parabolic {
namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line line;
  line.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  line.intercept = my - line.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - line.intercept - line.slope * x[i];
    ss_res += r * r;
  }
  line.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return line;
}

// Centered derivative at interior sample j on a nonuniform grid.
double centered_derivative(std::span<const double> t, std::span<const double> y, std::size_t j) {
  const double h1 = t[j] - t[j - 1];
  const double h2 = t[j + 1] - t[j];
  return -h2 / (h1 * (h1 + h2)) * y[j - 1] + (h2 - h1) / (h1 * h2) * y[j] +
         h1 / (h2 * (h1 + h2)) * y[j + 1];
}

bool gronwall_feasible(std::span<const double> times, std::span<const double> values, double initial,
                       double data, double c) {
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double envelope = std::exp(c * times[j]) * (initial + data) - data;
    const double slack = 1e-12 * std::max(std::abs(values[j]), initial + data);
    if (values[j] > envelope + slack) return false;
  }
  return true;
}

std::size_t shell_of(const std::array<int, kMaxDim>& xi) {
  const double r = std::sqrt(static_cast<double>(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]));
  return static_cast<std::size_t>(std::lround(r));
}

}  // namespace

double NormSeries::cumulative(int k, std::size_t j) const {
  if (k < 0 || k > order()) throw Error(ErrorCode::InvalidArgument, "order outside the series");
  double s = 0.0;
  for (int i = 0; i <= k; ++i) s += norms[i][j];
  return s;
}

NormSeries norm_series(const Trajectory& trajectory, int m) {
  if (m < 0 || m > kMaxSobolevOrder - 1)
    throw Error(ErrorCode::InvalidArgument, "series order must be in [0, 7]");
  const ProblemSpec& problem = trajectory.problem();
  NormSeries s;
  s.times.assign(trajectory.sample_times().begin(), trajectory.sample_times().end());
  s.norms.assign(m + 1, std::vector<double>(trajectory.size(), 0.0));
  for (std::size_t j = 0; j < trajectory.size(); ++j)
    for (int k = 0; k <= m; ++k) s.norms[k][j] = sobolev_norm(trajectory.states()[j], k);
  s.theta = problem.diffusion().theta();
  s.initial_l2_sq = sobolev_norm(problem.initial(), 0);
  double acc = 0.0;
  for (int k = 0; k <= m; ++k) {
    acc += sobolev_norm(problem.forcing(), k);
    s.forcing_sq.push_back(acc);
    s.initial_norms.push_back(sobolev_norm(problem.initial(), k));
  }
  return s;
}

std::vector<double> energy_weights(double theta, double t, int m) {
  std::vector<double> w(m + 1, 1.0);
  for (int k = 1; k <= m; ++k) w[k] = w[k - 1] * theta * t / (2.0 * k);
  return w;
}

EnergySeries energy_series(const NormSeries& series) {
  if (series.order() < 1) throw Error(ErrorCode::InvalidArgument, "energy functionals need order >= 1");
  EnergySeries e;
  e.times = series.times;
  e.order = series.order();
  e.initial = series.initial_l2_sq;
  for (std::size_t j = 0; j < series.times.size(); ++j) {
    const auto w = energy_weights(series.theta, series.times[j], e.order);
    e.m1.push_back(series.norms[0][j] + w[1] * series.norms[1][j]);
    double mm = 0.0;
    for (int k = 0; k <= e.order; ++k) mm += w[k] * series.norms[k][j];
    e.mm.push_back(mm);
  }
  return e;
}

RateFit rate_fit(const NormSeries& series, int k, double t_lo, double t_hi) {
  if (k < 0 || k > series.order()) throw Error(ErrorCode::InvalidArgument, "order outside the series");
  std::vector<double> x, y;
  for (std::size_t j = 0; j < series.times.size(); ++j) {
    const double t = series.times[j];
    const double v = series.norms[k][j];
    if (t >= t_lo * (1.0 - 1e-12) && t <= t_hi * (1.0 + 1e-12) && v > 0.0 && std::isfinite(v)) {
      x.push_back(std::log(t));
      y.push_back(std::log(v));
    }
  }
  if (x.size() < 8) throw Error(ErrorCode::WindowTooSparse, "fewer than 8 usable samples in the window");
  const Line line = least_squares(x, y);
  RateFit fit;
  fit.k = k;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = x.size();
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.fitted_constant = std::exp(line.intercept);
  return fit;
}

double rough_data_slope(int dim, int k, double decay) { return -(dim + 2.0 * k - 2.0 * decay) / 2.0; }

SmoothingBound check_smoothing_bound(const NormSeries& series, int k,
                                     std::optional<std::pair<double, double>> window) {
  if (k < 1 || k > series.order()) throw Error(ErrorCode::InvalidArgument, "order outside the series");
  const double lo = window ? window->first : series.times.front();
  const double hi = window ? window->second : series.times.back();
  const double denom = series.initial_l2_sq + series.forcing_sq[k];
  std::vector<double> ts, ratios;
  for (std::size_t j = 0; j < series.times.size(); ++j) {
    const double t = series.times[j];
    if (t < lo * (1.0 - 1e-12) || t > hi * (1.0 + 1e-12)) continue;
    ts.push_back(t);
    ratios.push_back(denom > 0.0 ? std::pow(t, k) * series.norms[k][j] / denom : 0.0);
  }
  SmoothingBound out;
  out.k = k;
  if (ts.empty()) return out;
  const auto it = std::max_element(ratios.begin(), ratios.end());
  out.fitted_constant = *it;
  out.argmax_time = ts[it - ratios.begin()];
  if (!std::isfinite(out.fitted_constant)) return out;

  const std::size_t left = std::max<std::size_t>(3, ts.size() / 4);
  std::vector<double> x, y;
  for (std::size_t j = 0; j < std::min(left, ts.size()); ++j) {
    if (ratios[j] <= 0.0) continue;
    x.push_back(std::log(ts[j]));
    y.push_back(std::log(ratios[j]));
  }
  out.left_slope = x.size() >= 2 ? least_squares(x, y).slope : 0.0;
  out.passed = out.left_slope >= -0.05;
  return out;
}

DissipationReport check_dissipation(const NormSeries& series, const Trajectory& trajectory) {
  const std::size_t count = series.times.size();
  if (count < 3) throw Error(ErrorCode::WindowTooSparse, "dissipation needs at least 3 samples");
  if (trajectory.size() != count) throw Error(ErrorCode::InvalidArgument, "series and trajectory differ");
  const int m = series.order();
  std::vector<double> top(count);
  for (std::size_t j = 0; j < count; ++j) top[j] = sobolev_norm(trajectory.states()[j], m + 1);

  DissipationReport out;
  for (int k = 0; k <= m; ++k) {
    const auto& e = series.norms[k];
    const auto& next = k < m ? series.norms[k + 1] : top;
    const double c = k == 0 ? 1.0 : 0.5;
    const double data = series.forcing_sq[k == 0 ? std::min(1, m) : k];
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < count; ++j) {
      const double lhs = 0.5 * centered_derivative(series.times, e, j) + c * series.theta * next[j];
      const double denom = data + series.cumulative(k, j);
      if (denom > 0.0) worst = std::max(worst, lhs / denom);
    }
    out.constants.push_back(worst);
    out.max_constant = std::max(out.max_constant, worst);
  }
  out.feasible_with_zero = out.max_constant <= 1e-10;
  return out;
}

double minimal_gronwall_constant(std::span<const double> times, std::span<const double> values,
                                 double initial, double data) {
  if (times.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "times and values differ in length");
  if (gronwall_feasible(times, values, initial, data, 0.0)) return 0.0;
  double lo = 0.0, hi = 1e3;
  if (!gronwall_feasible(times, values, initial, data, hi))
    throw Error(ErrorCode::Infeasible, "no Gronwall constant up to 1e3 bounds the series");
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (gronwall_feasible(times, values, initial, data, mid) ? hi : lo) = mid;
  }
  return hi;
}

GronwallFit check_gronwall(const EnergySeries& energy, double data) {
  return {minimal_gronwall_constant(energy.times, energy.m1, energy.initial, data),
          minimal_gronwall_constant(energy.times, energy.mm, energy.initial, data)};
}

ContinuityReport check_continuity(const ProblemSpec& problem, double t, std::span<const double> shifts,
                                  Method method, const SolveOptions& options) {
  if (!(t > 0.0) || t > problem.horizon()) throw Error(ErrorCode::InvalidArgument, "t must lie in (0, T]");
  std::vector<double> times{t};
  for (double s : shifts) {
    if (!(s >= 0.0) || t + s > problem.horizon())
      throw Error(ErrorCode::InvalidArgument, "shifted time must lie in [t, T]");
    if (s > 0.0) times.push_back(t + s);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const Trajectory traj = solve(problem, times, method, options);
  const auto index = [&](double time) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), time) - times.begin());
  };
  const ScalarField& base = traj.states()[0];

  ContinuityReport out;
  out.time = t;
  for (double s : shifts) {
    out.shifts.push_back(s);
    if (s == 0.0) {
      out.l2_defects.push_back(0.0);
      out.gradient_defects.push_back(0.0);
      continue;
    }
    const ScalarField diff = combine(1.0, traj.states()[index(t + s)], -1.0, base);
    out.l2_defects.push_back(std::sqrt(sobolev_norm(diff, 0)));
    out.gradient_defects.push_back(std::sqrt(sobolev_norm(diff, 1)));
  }
  for (std::size_t i = 0; i + 1 < out.shifts.size(); ++i) {
    const auto ratio = [](double a, double b) { return a > 0.0 ? b / a : 0.0; };
    out.l2_ratios.push_back(ratio(out.l2_defects[i], out.l2_defects[i + 1]));
    out.gradient_ratios.push_back(ratio(out.gradient_defects[i], out.gradient_defects[i + 1]));
  }
  return out;
}

StabilityReport check_uniqueness_stability(const ProblemSpec& problem, const ScalarField& perturbed_initial,
                                           std::span<const double> times, Method method,
                                           const SolveOptions& options) {
  const Trajectory a = solve(problem, times, method, options);
  const Trajectory b = solve(problem.with_initial(perturbed_initial), times, method, options);
  StabilityReport out;
  out.times.assign(times.begin(), times.end());
  out.initial_defect = l2_distance(problem.initial(), perturbed_initial);
  for (std::size_t j = 0; j < a.size(); ++j) out.defects.push_back(l2_distance(a.states()[j], b.states()[j]));

  std::vector<double> sq(out.defects.size());
  std::transform(out.defects.begin(), out.defects.end(), sq.begin(), [](double d) { return d * d; });
  out.gronwall_constant = minimal_gronwall_constant(out.times, sq, out.initial_defect * out.initial_defect, 0.0);

  const double tol = 1e-12;
  out.contractive = std::all_of(out.defects.begin(), out.defects.end(),
                                [&](double d) { return d <= out.initial_defect * (1.0 + tol); });
  out.nonincreasing = out.defects.empty() || out.defects[0] <= out.initial_defect * (1.0 + tol);
  for (std::size_t j = 1; j < out.defects.size(); ++j)
    out.nonincreasing = out.nonincreasing && out.defects[j] <= out.defects[j - 1] * (1.0 + tol);
  return out;
}

WeakResidual residual_weak_form(const Trajectory& trajectory, int test_modes) {
  if (trajectory.size() < 3) throw Error(ErrorCode::WindowTooSparse, "weak residual needs at least 3 samples");
  const ProblemSpec& problem = trajectory.problem();
  const GridSpec& grid = problem.grid();
  const int n = grid.dim();
  const auto basis = trigonometric_basis(grid, test_modes);
  const double h = grid.cell_volume();
  const DiffusionField& d = problem.diffusion();

  // Coefficients <u(t_j), w> and fluxes D grad u(t_j).
  std::vector<std::vector<double>> coeff(basis.size(), std::vector<double>(trajectory.size()));
  std::vector<std::vector<std::vector<double>>> flux(trajectory.size());
  std::vector<std::vector<double>> values(basis.size());
  std::vector<std::vector<std::vector<double>>> grads(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    values[i] = basis_values(grid, basis[i]);
    grads[i] = basis_gradient(grid, basis[i]);
  }
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const ScalarField& u = trajectory.states()[j];
    const ScalarField uv = u.has_values() ? u : transform_backward(u);
    for (std::size_t i = 0; i < basis.size(); ++i) coeff[i][j] = h * kernels::dot(values[i], uv.values());
    std::vector<std::vector<double>> grad_u;
    for (int a = 0; a < n; ++a) {
      const ScalarField du = spectral_derivative(u, a);
      grad_u.emplace_back(du.values().begin(), du.values().end());
    }
    flux[j].assign(n, std::vector<double>(grid.size(), 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const auto dab = d.component(a, b);
        for (std::size_t p = 0; p < grid.size(); ++p) flux[j][a][p] += dab[p] * grad_u[b][p];
      }
  }
  std::vector<double> load(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) load[i] = h * kernels::dot(values[i], problem.forcing().values());

  const double scale = std::sqrt(sobolev_norm(problem.initial(), 0)) + std::sqrt(sobolev_norm(problem.forcing(), 0));
  WeakResidual out;
  out.test_functions = basis.size();
  out.samples = trajectory.size() - 2;
  const auto times = trajectory.sample_times();
  for (std::size_t j = 1; j + 1 < trajectory.size(); ++j) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      double stiff = 0.0;
      for (int a = 0; a < n; ++a) stiff += kernels::dot(flux[j][a], grads[i][a]);
      const double r = centered_derivative(times, coeff[i], j) + h * stiff - load[i];
      out.max_residual = std::max(out.max_residual, std::abs(r));
    }
  }
  if (scale > 0.0) out.max_residual /= scale;
  return out;
}

Trajectory shuffled_control(const Trajectory& trajectory, std::uint64_t seed) {
  const std::size_t n = trajectory.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SeedStream rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  bool identity = true;
  for (std::size_t i = 0; i < n; ++i) identity = identity && order[i] == i;
  if (identity && n > 1) std::rotate(order.begin(), order.begin() + 1, order.end());
  std::vector<ScalarField> states;
  states.reserve(n);
  for (std::size_t i : order) states.push_back(trajectory.states()[i]);
  const auto times = trajectory.sample_times();
  return Trajectory(trajectory.problem(), std::vector<double>(times.begin(), times.end()), std::move(states),
                    trajectory.stats());
}

DecayProfile spectral_decay_profile(const ScalarField& state) {
  const ScalarField s = state.has_spectral() ? state : transform_forward(state);
  const GridSpec& grid = s.grid();
  const auto c = s.spectral();
  DecayProfile out;
  const std::size_t shells = static_cast<std::size_t>(std::ceil(std::sqrt(grid.dim()) * grid.points() / 2.0)) + 1;
  out.amplitude.assign(shells, 0.0);
  out.counts.assign(shells, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto slots = grid.unravel(i);
    bool nyquist = false;
    for (int a = 0; a < grid.dim(); ++a) nyquist = nyquist || grid.is_nyquist_slot(slots[a]);
    if (nyquist) continue;
    const std::size_t r = shell_of(grid.lattice(i));
    out.amplitude[r] += std::abs(c[i]);
    ++out.counts[r];
  }
  while (!out.counts.empty() && out.counts.back() == 0) {
    out.counts.pop_back();
    out.amplitude.pop_back();
  }
  for (std::size_t r = 0; r < out.amplitude.size(); ++r)
    if (out.counts[r] > 0) out.amplitude[r] /= static_cast<double>(out.counts[r]);
  return out;
}

std::optional<int> dominance_crossover(const DecayProfile& later, const DecayProfile& earlier, double rel_tol,
                                       double floor) {
  const std::size_t shells = std::min(later.amplitude.size(), earlier.amplitude.size());
  if (shells < 2) return std::nullopt;
  int last_violation = 0;
  for (std::size_t r = 1; r < shells; ++r)
    if (later.amplitude[r] > earlier.amplitude[r] * (1.0 + rel_tol) + floor) last_violation = static_cast<int>(r);
  if (last_violation == static_cast<int>(shells) - 1) return std::nullopt;
  return std::max(1, last_violation + 1);
}

double gaussian_rate(const DecayProfile& later, const DecayProfile& earlier, int lo, int hi, double length) {
  std::vector<double> x, y;
  const double scale = 2.0 * std::numbers::pi / length;
  for (int r = std::max(lo, 0); r <= hi; ++r) {
    if (static_cast<std::size_t>(r) >= later.amplitude.size() || static_cast<std::size_t>(r) >= earlier.amplitude.size())
      break;
    const double a = later.amplitude[r], b = earlier.amplitude[r];
    if (a <= 0.0 || b <= 0.0) continue;
    x.push_back((scale * r) * (scale * r));
    y.push_back(-std::log(a / b));
  }
  if (x.size() < 2) throw Error(ErrorCode::WindowTooSparse, "fewer than 2 usable shells");
  return least_squares(x, y).slope;
}

double power_law_slope(const DecayProfile& profile, int lo, int hi) {
  std::vector<double> x, y;
  for (int r = std::max(lo, 1); r <= hi && static_cast<std::size_t>(r) < profile.amplitude.size(); ++r) {
    if (profile.amplitude[r] <= 0.0) continue;
    x.push_back(std::log(static_cast<double>(r)));
    y.push_back(std::log(profile.amplitude[r]));
  }
  if (x.size() < 2) throw Error(ErrorCode::WindowTooSparse, "fewer than 2 usable shells");
  return least_squares(x, y).slope;
}

}  // namespace parabolic
