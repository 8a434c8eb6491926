#include "doctest.h"

#include <cmath>
#include <numbers>

#include "parabolic/errors.hpp"
#include "parabolic/evolution.hpp"
#include "parabolic/monitor.hpp"
#include "parabolic/problem.hpp"

using namespace parabolic;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

// Series with norms[k][j] = rows[k](t_j).
NormSeries synthetic(const std::vector<double>& times, const std::vector<std::function<double(double)>>& rows) {
  NormSeries s;
  s.times = times;
  for (const auto& r : rows) {
    std::vector<double> v;
    for (double t : times) v.push_back(r(t));
    s.norms.push_back(v);
  }
  s.theta = 1.0;
  s.initial_l2_sq = 1.0;
  s.forcing_sq.assign(rows.size(), 0.0);
  s.initial_norms.assign(rows.size(), 1.0);
  return s;
}

ProblemSpec heat_problem(const GridSpec& g, ScalarField u0, double c = 1.0, double horizon = 1.0) {
  return ProblemSpec(isotropic_diffusion(g, c), ScalarField::zeros(g), std::move(u0), horizon);
}

}  // namespace

TEST_CASE("norm series of trivial and single-mode runs") {
  GridSpec g(1, 32);
  const auto zero = solve(heat_problem(g, ScalarField::zeros(g)), linear_schedule(0.1, 1.0, 5),
                          Method::ExactExponential);
  const auto zs = norm_series(zero, 3);
  for (const auto& row : zs.norms)
    for (double v : row) CHECK(v == 0.0);
  CHECK(norm_series(zero, 0).norms.size() == 1);
  CHECK(code_of([&] { norm_series(zero, 8); }) == ErrorCode::InvalidArgument);

  const double theta = 0.8;
  const auto u0 = mode_field(g, std::vector<int>{3}, 1.0);
  const auto times = log_schedule(0.01, 1.0, 9);
  const auto traj = solve(heat_problem(g, u0, theta), times, Method::ExactExponential);
  const auto s = norm_series(traj, 2);
  const double l2 = sobolev_norm(u0, 0);
  for (std::size_t j = 0; j < times.size(); ++j)
    CHECK(s.norms[1][j] == doctest::Approx(9.0 * std::exp(-2.0 * theta * 9.0 * times[j]) * l2).epsilon(1e-12));
  CHECK(s.theta == theta);
}

TEST_CASE("energy functional evaluation") {
  NormSeries s;
  s.times = {0.5};
  s.norms = {{1.0}, {4.0}};
  s.theta = 2.0;
  s.initial_l2_sq = 1.0;
  s.forcing_sq = {0.0, 0.0};
  const auto e = energy_series(s);
  CHECK(e.m1[0] == doctest::Approx(3.0));
  CHECK(e.mm[0] == doctest::Approx(3.0));

  const auto w = energy_weights(2.0, 1.0, 2);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.5));

  NormSeries z = s;
  z.norms = {{0.0}, {0.0}};
  CHECK(energy_series(z).mm[0] == 0.0);
  NormSeries only_l2 = s;
  only_l2.norms.resize(1);
  CHECK(code_of([&] { energy_series(only_l2); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("energy weights follow (theta t)^k / (2^k k!)") {
  for (double theta : {0.3, 1.0, 2.5})
    for (double t : {1e-3, 0.4, 3.0}) {
      const auto w = energy_weights(theta, t, 7);
      for (int k = 0; k <= 7; ++k)
        CHECK(w[k] == doctest::Approx(std::pow(theta * t, k) / (std::pow(2.0, k) * std::tgamma(k + 1.0))).epsilon(1e-14));
    }
}

TEST_CASE("rate fits on synthetic series") {
  const auto times = log_schedule(1e-3, 1.0, 20);
  const auto s = synthetic(times, {[](double t) { return 1.0 / t; }, [](double) { return 5.0; }});
  const auto a = rate_fit(s, 0, 1e-3, 1.0);
  CHECK(a.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.fitted_constant == doctest::Approx(1.0).epsilon(1e-10));
  const auto b = rate_fit(s, 1, 1e-3, 1.0);
  CHECK(std::abs(b.slope) < 1e-12);
  CHECK(b.fitted_constant == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(code_of([&] { rate_fit(s, 0, 0.5, 1.0); }) == ErrorCode::WindowTooSparse);
  CHECK(code_of([&] { rate_fit(s, 2, 1e-3, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rough-data rate against direct lattice summation") {
  // ||grad^k u(t)||^2 = 2 pi * 2 sum_{xi=1}^{N/2-1} xi^(2k - 2s) e^(-2 xi^2 t).
  const int n = 4096;
  const double s = 0.75;
  GridSpec g(1, n);
  const auto times = log_schedule(1e-4, 1e-2, 40);
  const auto traj = solve(heat_problem(g, rough_data_sampler({s, 7, 1.0, 0.0}, g), 1.0, 1e-2), times,
                          Method::ExactExponential);
  const auto series = norm_series(traj, 3);
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> lattice;
    for (double t : times) {
      long double sum = 0.0L;
      for (int xi = 1; xi < n / 2; ++xi) sum += std::pow(xi, 2.0 * k - 2.0 * s) * std::exp(-2.0 * xi * xi * t);
      lattice.push_back(4.0 * kPi * static_cast<double>(sum));
    }
    for (std::size_t j = 0; j < times.size(); ++j)
      CHECK(series.norms[k][j] == doctest::Approx(lattice[j]).epsilon(1e-10));
    const auto fit = rate_fit(series, k, 1e-4, 1e-2);
    CHECK(std::abs(fit.slope - rough_data_slope(1, k, s)) <= 0.10);
    CHECK(fit.r2 >= 0.98);
  }
  CHECK(rough_data_slope(1, 1, 0.75) == -0.75);
  CHECK(rough_data_slope(1, 2, 0.75) == -1.75);
}

TEST_CASE("smoothing bound") {
  GridSpec g(1, 4096);
  const auto times = log_schedule(1e-4, 1e-2, 40);
  const auto rough = norm_series(
      solve(heat_problem(g, rough_data_sampler({0.75, 7, 1.0, 0.0}, g), 1.0, 1e-2), times, Method::ExactExponential), 3);
  for (int k = 1; k <= 3; ++k) {
    const auto b = check_smoothing_bound(rough, k);
    CHECK(b.passed);
    CHECK(std::isfinite(b.fitted_constant));
  }
  // t ||grad u||^2 ~ t^(1 - 0.75) on the rough run.
  CHECK(check_smoothing_bound(rough, 1).left_slope == doctest::Approx(0.25).epsilon(0.05));

  GridSpec h(1, 64);
  const auto smooth = norm_series(solve(heat_problem(h, multimode_field(h)), times, Method::ExactExponential), 3);
  for (int k = 1; k <= 3; ++k) CHECK(check_smoothing_bound(smooth, k).passed);

  const auto bad = synthetic(times, {[](double) { return 1.0; }, [](double t) { return std::pow(t, -1.5); }});
  CHECK_FALSE(check_smoothing_bound(bad, 1).passed);
}

TEST_CASE("dissipation inequalities") {
  GridSpec g(1, 64);
  const auto times = log_schedule(1e-3, 1.0, 30);
  const auto heat = solve(heat_problem(g, multimode_field(g)), times, Method::ExactExponential);
  const auto r = check_dissipation(norm_series(heat, 3), heat);
  CHECK(r.feasible_with_zero);
  CHECK(r.constants.size() == 4);

  const auto zero = solve(heat_problem(g, ScalarField::zeros(g)), times, Method::ExactExponential);
  const auto z = check_dissipation(norm_series(zero, 3), zero);
  CHECK(z.max_constant == 0.0);

  // Variable coefficient: finite constant, stable under N-doubling.
  double previous = -1.0;
  for (int n : {64, 128}) {
    GridSpec gv(1, n);
    ProblemSpec p(sine_diffusion(gv, 1.5, 1.0), ScalarField::zeros(gv), multimode_field(gv), 1.0);
    const auto traj = solve(p, times, Method::SplitExponential);
    const auto d = check_dissipation(norm_series(traj, 3), traj);
    CHECK(std::isfinite(d.max_constant));
    CHECK(d.constants[0] <= 1e-10);
    if (previous >= 0.0) CHECK(std::abs(d.max_constant - previous) <= 0.2 * std::max(previous, 1e-10));
    previous = d.max_constant;
  }
}

TEST_CASE("minimal Gronwall constant") {
  const auto times = linear_schedule(0.01, 1.0, 50);
  std::vector<double> flat(times.size(), 2.0), grow;
  for (double t : times) grow.push_back(2.0 * std::exp(2.0 * t));
  CHECK(minimal_gronwall_constant(times, flat, 2.0, 0.0) == 0.0);
  CHECK(std::abs(minimal_gronwall_constant(times, grow, 2.0, 0.0) - 2.0) <= 1e-6);
  // With data B the envelope is e^(Ct)(g0 + B) - B.
  std::vector<double> with_data;
  for (double t : times) with_data.push_back(std::exp(0.5 * t) * 3.0 - 1.0);
  CHECK(std::abs(minimal_gronwall_constant(times, with_data, 2.0, 1.0) - 0.5) <= 1e-6);
  std::vector<double> explode;
  for (double t : times) explode.push_back(std::exp(2000.0 * t));
  CHECK(code_of([&] { minimal_gronwall_constant(times, explode, 1.0, 0.0); }) == ErrorCode::Infeasible);

  GridSpec g(1, 64);
  const auto heat = solve(heat_problem(g, multimode_field(g)), times, Method::ExactExponential);
  const auto fit = check_gronwall(energy_series(norm_series(heat, 3)), 0.0);
  CHECK(fit.m1_constant == 0.0);
  CHECK(fit.mm_constant == 0.0);
}

TEST_CASE("continuity in time") {
  GridSpec g(1, 32);
  const double theta = 1.0, t = 0.1;
  const auto u0 = mode_field(g, std::vector<int>{2}, 1.0);
  const auto p = heat_problem(g, u0, theta);
  const double shifts[] = {0.0, 1e-3, 5e-4, 2.5e-4};
  const auto r = check_continuity(p, t, shifts, Method::ExactExponential);
  CHECK(r.l2_defects[0] == 0.0);
  const double norm0 = std::sqrt(sobolev_norm(u0, 0));
  for (std::size_t i = 1; i < 4; ++i) {
    const double expected = std::abs(std::expm1(-4.0 * theta * shifts[i])) * std::exp(-4.0 * theta * t) * norm0;
    CHECK(r.l2_defects[i] == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(r.l2_ratios[1] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.l2_ratios[2] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(code_of([&] { check_continuity(p, 0.0, shifts, Method::ExactExponential); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rough-data continuity ratios at t = 1e-3") {
  GridSpec g(1, 4096);
  const auto p = heat_problem(g, rough_data_sampler({0.75, 7, 1.0, 0.0}, g), 1.0, 1e-2);
  const double shifts[] = {8e-6, 4e-6, 2e-6, 1e-6};
  const auto r = check_continuity(p, 1e-3, shifts, Method::ExactExponential);
  for (double ratio : r.l2_ratios) CHECK(std::abs(ratio - 0.5) <= 0.1);
  for (double ratio : r.gradient_ratios) CHECK(std::abs(ratio - 0.5) <= 0.1);
}

TEST_CASE("uniqueness and stability") {
  GridSpec g(1, 64);
  const auto times = linear_schedule(0.05, 1.0, 20);
  const auto p = heat_problem(g, multimode_field(g), 0.7);
  const auto same = check_uniqueness_stability(p, p.initial(), times, Method::SplitExponential);
  for (double d : same.defects) CHECK(d <= 1e-12);

  const auto delta = mode_field(g, std::vector<int>{4}, 0.02);
  const auto r = check_uniqueness_stability(p, combine(1.0, p.initial(), 1.0, delta), times, Method::ExactExponential);
  for (std::size_t j = 0; j < times.size(); ++j)
    CHECK(r.defects[j] == doctest::Approx(std::exp(-0.7 * 16.0 * times[j]) * r.initial_defect).epsilon(1e-10));
  CHECK(r.contractive);
  CHECK(r.nonincreasing);

  ProblemSpec v(sine_diffusion(g, 1.5, 1.0), manufactured_steady(sine_diffusion(g, 1.5, 1.0), multimode_field(g)),
                poisson_field(g, 0.5), 1.0);
  const auto rv = check_uniqueness_stability(v, combine(1.0, v.initial(), 1.0, delta), times,
                                             Method::SplitExponential);
  CHECK(rv.nonincreasing);
  CHECK(rv.gronwall_constant == 0.0);
}

TEST_CASE("weak-form residual and its negative control") {
  GridSpec g(1, 64);
  const auto d = sine_diffusion(g, 1.5, 1.0);
  const auto target = multimode_field(g);
  ProblemSpec steady(d, manufactured_steady(d, target), target, 0.1);
  const auto st = solve(steady, linear_schedule(0.05, 0.1, 11), Method::SplitExponential);
  CHECK(residual_weak_form(st, 9).max_residual <= 1e-8);

  const auto heat = solve(heat_problem(g, multimode_field(g)), linear_schedule(0.01, 0.015, 51),
                          Method::ExactExponential);
  const auto r = residual_weak_form(heat, 9);
  CHECK(r.max_residual <= 1e-6);
  CHECK(r.test_functions == 9);
  CHECK(r.samples == 49);
  CHECK(residual_weak_form(shuffled_control(heat, 3), 9).max_residual >= 0.1);

  // Independent random fields are not a solution.
  std::vector<ScalarField> noise;
  SeedStream rng(5);
  for (int j = 0; j < 11; ++j) {
    std::vector<double> v(g.size());
    for (auto& x : v) x = rng.uniform() - 0.5;
    noise.push_back(ScalarField::from_values(g, v));
  }
  const Trajectory fake(heat_problem(g, multimode_field(g)), linear_schedule(0.01, 0.02, 11), noise, {});
  CHECK(residual_weak_form(fake, 9).max_residual >= 0.1);
}

TEST_CASE("shuffled control is a seeded non-identity permutation") {
  GridSpec g(1, 16);
  const auto traj = solve(heat_problem(g, multimode_field(g)), linear_schedule(0.1, 1.0, 4), Method::ExactExponential);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = shuffled_control(traj, seed);
    const auto b = shuffled_control(traj, seed);
    bool identity = true;
    for (std::size_t j = 0; j < traj.size(); ++j) {
      identity = identity && l2_distance(a.states()[j], traj.states()[j]) == 0.0;
      CHECK(l2_distance(a.states()[j], b.states()[j]) == 0.0);
    }
    CHECK_FALSE(identity);
  }
}

TEST_CASE("spectral decay profiles") {
  GridSpec g(1, 256);
  const auto u0 = rough_data_sampler({0.75, 3, 1.0, 0.0}, g);
  const auto p0 = spectral_decay_profile(u0);
  for (int r = 1; r < 128; ++r) CHECK(p0.amplitude[r] == doctest::Approx(std::pow(r, -0.75)).epsilon(1e-12));
  CHECK(power_law_slope(p0, 1, 100) == doctest::Approx(-0.75).epsilon(1e-10));

  const double c = 0.5;
  const double times[] = {0.001, 0.002};
  const auto traj = solve(heat_problem(g, u0, c, 0.01), times, Method::ExactExponential);
  const auto p1 = spectral_decay_profile(traj.states()[0]);
  const auto p2 = spectral_decay_profile(traj.states()[1]);
  for (int r = 1; r < 40; ++r) CHECK(p1.amplitude[r] / p0.amplitude[r] == doctest::Approx(std::exp(-c * r * r * 0.001)).epsilon(1e-10));
  CHECK(dominance_crossover(p2, p1).has_value());
  CHECK(dominance_crossover(p1, p0).value() == 1);
  CHECK(gaussian_rate(p2, p1, 1, 40, g.length()) == doctest::Approx(c * 0.001).epsilon(1e-8));
  CHECK_FALSE(dominance_crossover(p0, p1).has_value());

  const auto z = spectral_decay_profile(ScalarField::zeros(g));
  for (double a : z.amplitude) CHECK(a == 0.0);
}
