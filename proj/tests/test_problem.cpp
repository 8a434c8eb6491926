#include "doctest.h"

#include <cmath>
#include <numbers>

#include "parabolic/errors.hpp"
#include "parabolic/evolution.hpp"
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

double max_abs_diff(const ScalarField& a, const std::function<double(double)>& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.grid().size(); ++i)
    m = std::max(m, std::abs(a.values()[i] - f(a.grid().coordinate(i)[0])));
  return m;
}

}  // namespace

TEST_CASE("ellipticity of stock fields") {
  GridSpec g1(1, 64), g2(2, 32);
  CHECK(ellipticity_theta(isotropic_diffusion(g2, 1.0)) == 1.0);
  const double diag[] = {2.0, 3.0};
  const auto d = diagonal_diffusion(g2, diag);
  CHECK(ellipticity_theta(d) == 2.0);
  CHECK(d.sup_norm() == 3.0);
  CHECK(ellipticity_theta(sine_diffusion(g1, 1.5, 1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  // Closed form for the modulated field: a - |b| at the sine extrema, the
  // rank-one part only adds along v.
  const auto m = modulated_diffusion(g2, 1.0, 0.5, 0.3);
  CHECK(m.theta() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.sup_norm() == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(code_of([&] { isotropic_diffusion(g1, 0.0); }) == ErrorCode::NotElliptic);
  CHECK(code_of([&] { sine_diffusion(g1, 1.0, 1.0); }) == ErrorCode::NotElliptic);
  CHECK(isotropic_diffusion(g1, 2.0).constant_isotropic() == 2.0);
  CHECK_FALSE(sine_diffusion(g1, 1.5, 1.0).constant_isotropic().has_value());
}

TEST_CASE("theta is stable under refinement") {
  for (int n : {32, 64, 128}) {
    const double a = sine_diffusion(GridSpec(1, n), 1.5, 1.0).theta();
    const double b = sine_diffusion(GridSpec(1, 2 * n), 1.5, 1.0).theta();
    CHECK(std::abs(a - b) <= 0.05 * b);
    const double c = modulated_diffusion(GridSpec(2, n), 2.0, 1.0, 0.5).theta();
    const double e = modulated_diffusion(GridSpec(2, 2 * n), 2.0, 1.0, 0.5).theta();
    CHECK(std::abs(c - e) <= 0.05 * e);
  }
}

TEST_CASE("eigen_range against hand values") {
  Matrix3 m{2, 1, 0, 1, 2, 0, 0, 0, 5};
  auto [lo2, hi2] = eigen_range(m, 2);
  CHECK(lo2 == doctest::Approx(1.0));
  CHECK(hi2 == doctest::Approx(3.0));
  auto [lo3, hi3] = eigen_range(m, 3);
  CHECK(lo3 == doctest::Approx(1.0));
  CHECK(hi3 == doctest::Approx(5.0));
}

TEST_CASE("asymmetric or non-elliptic matrices are rejected") {
  GridSpec g(2, 8);
  CHECK(code_of([&] {
          DiffusionField::from_function(g, [](const auto&) { return Matrix3{1, 0.5, 0, 0.4, 1, 0, 0, 0, 0}; });
        }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          DiffusionField::from_function(g, [](const auto&) { return Matrix3{1, 2, 0, 2, 1, 0, 0, 0, 0}; });
        }) == ErrorCode::NotElliptic);
}

TEST_CASE("problem spec validation") {
  GridSpec g(1, 16), h(1, 32);
  const auto d = isotropic_diffusion(g, 1.0);
  CHECK(code_of([&] { ProblemSpec(d, ScalarField::zeros(g), ScalarField::zeros(h), 1.0); }) ==
        ErrorCode::GridMismatch);
  CHECK(code_of([&] { ProblemSpec(d, ScalarField::zeros(g), ScalarField::zeros(g), 0.0); }) ==
        ErrorCode::InvalidArgument);
  ProblemSpec p(d, ScalarField::zeros(g), ScalarField::zeros(g), 2.0);
  CHECK(p.forcing().has_values());
  CHECK(p.forcing().has_spectral());
  CHECK(p.with_horizon(3.0).horizon() == 3.0);
}

TEST_CASE("rough data sampler") {
  GridSpec g(1, 256);
  CHECK(code_of([&] { rough_data_sampler({0.4, 1, 1.0, 0.0}, g); }) == ErrorCode::DecayTooSmall);
  CHECK(code_of([&] { rough_data_sampler({1.0, 1, 1.0, 0.0}, GridSpec(2, 16)); }) == ErrorCode::DecayTooSmall);

  const auto zero = rough_data_sampler({0.75, 3, 0.0, 0.0}, g);
  for (double v : zero.values()) CHECK(v == 0.0);

  const auto a = rough_data_sampler({0.75, 42, 1.0, 0.0}, g);
  const auto b = rough_data_sampler({0.75, 42, 1.0, 0.0}, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(a.values()[i] == b.values()[i]);

  // Prescribed modulus and Hermitian symmetry, Nyquist and mean zero.
  const auto af = transform_forward(a);
  const auto c = af.spectral();
  CHECK(std::abs(c[0]) < 1e-15);
  CHECK(std::abs(c[128]) < 1e-15);
  for (int xi : {1, 2, 7, 100, 127}) {
    CHECK(std::abs(c[xi]) == doctest::Approx(std::pow(xi, -0.75)).epsilon(1e-12));
    CHECK(std::abs(c[xi] - std::conj(c[256 - xi])) < 1e-14);
  }
  CHECK(mean(rough_data_sampler({0.75, 42, 1.0, 0.3}, g)) == doctest::Approx(0.3));
}

TEST_CASE("rough data keeps its modes under refinement") {
  const RoughDataSpec spec{0.75, 9, 1.0, 0.0};
  const auto cf = transform_forward(rough_data_sampler(spec, GridSpec(1, 64)));
  const auto ff = transform_forward(rough_data_sampler(spec, GridSpec(1, 256)));
  const auto coarse = cf.spectral();
  const auto fine = ff.spectral();
  for (int xi = 1; xi < 32; ++xi) {
    CHECK(std::abs(coarse[xi] - fine[xi]) < 1e-13);
    CHECK(std::abs(coarse[64 - xi] - fine[256 - xi]) < 1e-13);
  }
}

TEST_CASE("rough data is L2 bounded while the H1 sum diverges") {
  // Direct lattice sums: ||u||^2 = 2 pi * 2 sum_{xi=1}^{N/2-1} xi^-1.5 converges,
  // ||grad u||^2 = 2 pi * 2 sum xi^0.5 grows like N^1.5.
  double prev_l2 = 0.0, prev_h1 = 0.0;
  for (int n : {256, 512, 1024, 2048, 4096}) {
    const auto u = rough_data_sampler({0.75, 5, 1.0, 0.0}, GridSpec(1, n));
    double l2 = 0.0, h1 = 0.0;
    for (int xi = 1; xi < n / 2; ++xi) {
      l2 += 2.0 * 2.0 * kPi * std::pow(xi, -1.5);
      h1 += 2.0 * 2.0 * kPi * std::pow(xi, 0.5);
    }
    CHECK(sobolev_norm(u, 0) == doctest::Approx(l2).epsilon(1e-12));
    CHECK(sobolev_norm(u, 1) == doctest::Approx(h1).epsilon(1e-12));
    CHECK(l2 < 2.0 * 2.0 * kPi * 2.6124);  // zeta(1.5)
    if (prev_h1 > 0.0) {
      CHECK(sobolev_norm(u, 1) / prev_h1 > 1.2);
      CHECK(sobolev_norm(u, 0) / prev_l2 < 1.05);
    }
    prev_l2 = sobolev_norm(u, 0);
    prev_h1 = sobolev_norm(u, 1);
  }
}

TEST_CASE("seed stream splitting is order independent") {
  SeedStream root(123);
  auto a = root.split(5);
  auto b = root.split(5);
  CHECK(a.next() == b.next());
  CHECK(root.split(5).next() != root.split(6).next());
  SeedStream r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("manufactured steady states") {
  GridSpec g(1, 64);
  const auto s = mode_field(g, std::vector<int>{1}, 1.0);
  CHECK(max_abs_diff(manufactured_steady(isotropic_diffusion(g, 1.0), ScalarField::zeros(g)),
                     [](double) { return 0.0; }) == 0.0);
  CHECK(max_abs_diff(manufactured_steady(isotropic_diffusion(g, 1.0), s), [](double x) { return std::sin(x); }) <
        1e-12);
  // -((2 + sin x) cos x)' = 2 sin x - cos 2x
  CHECK(max_abs_diff(manufactured_steady(sine_diffusion(g, 2.0, 1.0), s),
                     [](double x) { return 2.0 * std::sin(x) - std::cos(2.0 * x); }) < 1e-12);
}

TEST_CASE("manufactured forcing round-trips through the operator") {
  GridSpec g(2, 32);
  const auto d = modulated_diffusion(g, 2.0, 1.0, 0.5);
  const auto target = multimode_field(g);
  const auto f = manufactured_steady(d, target);
  const auto back = apply_operator(d, target);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err += std::pow(back.values()[i] + f.values()[i], 2);
    ref += std::pow(f.values()[i], 2);
  }
  CHECK(std::sqrt(err / ref) < 1e-8);
}

TEST_CASE("stock scalar fields") {
  GridSpec g(1, 64);
  const auto pf = transform_forward(poisson_field(g, 0.5));
  const auto p = pf.spectral();
  for (int xi = 0; xi < 20; ++xi) CHECK(std::abs(p[xi]) == doctest::Approx(std::pow(0.5, xi)).epsilon(1e-12));
  CHECK(code_of([&] { poisson_field(g, 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { mode_field(g, std::vector<int>{32}, 1.0); }) == ErrorCode::InvalidArgument);
  const auto mm = multimode_field(g);
  CHECK(sobolev_norm(mm, 0) == doctest::Approx(kPi * (1.0 + 0.25 + 0.0625)).epsilon(1e-13));
  CHECK(mean(constant_field(g, 4.0)) == doctest::Approx(4.0));
}
