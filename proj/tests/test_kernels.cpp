#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/kernels.hpp"

using namespace parabolic;
using kernels::cplx;

namespace {

struct Data {
  std::vector<cplx> c, x, y;
  std::vector<double> w, a, b;
};

Data make_data(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    d.c.emplace_back(u(rng), u(rng));
    d.x.emplace_back(u(rng), u(rng));
    d.y.emplace_back(u(rng), u(rng));
    d.w.push_back(std::abs(u(rng)) * 100.0);
    d.a.push_back(u(rng) * std::pow(10.0, 6.0 * u(rng)));
    d.b.push_back(u(rng));
  }
  return d;
}

// Exact-ish references in long double.
long double ref_energy(const Data& d) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < d.c.size(); ++i)
    s += static_cast<long double>(d.w[i]) * (static_cast<long double>(d.c[i].real()) * d.c[i].real() +
                                             static_cast<long double>(d.c[i].imag()) * d.c[i].imag());
  return s;
}

long double ref_dot(const Data& d) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < d.a.size(); ++i) s += static_cast<long double>(d.a[i]) * d.b[i];
  return s;
}

void check_table(const kernels::KernelTable& t) {
  // Sizes chosen to hit every remainder of the 4-wide and 2-wide loops.
  for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 7u, 8u, 33u, 1001u, 4096u}) {
    const Data d = make_data(n, 100 + static_cast<unsigned>(n));
    const long double e = ref_energy(d);
    CHECK(std::abs(t.weighted_energy(d.c.data(), d.w.data(), n) - static_cast<double>(e)) <=
          1e-15 * std::abs(static_cast<double>(e)) + 1e-300);
    const long double p = ref_dot(d);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(d.a[i] * d.b[i]);
    CHECK(std::abs(t.dot(d.a.data(), d.b.data(), n) - static_cast<double>(p)) <= 1e-15 * mag + 1e-300);

    std::vector<cplx> out(n), out2(n), y = d.y;
    t.imag_scale(d.x.data(), d.b.data(), out.data(), n);
    t.diag_scale(d.b.data(), d.x.data(), out2.data(), n);
    t.diag_axpy(d.b.data(), d.x.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out[i] == cplx(-d.b[i] * d.x[i].imag(), d.b[i] * d.x[i].real()));
      CHECK(out2[i] == cplx(d.b[i] * d.x[i].real(), d.b[i] * d.x[i].imag()));
      CHECK(std::abs(y[i] - (d.y[i] + d.b[i] * d.x[i])) <= 1e-15 * (std::abs(d.y[i]) + 1.0));
    }
  }
}

}  // namespace

TEST_CASE("scalar kernels match long double references") { check_table(kernels::scalar_table()); }

TEST_CASE("avx2 kernels match long double references") {
  const auto* t = kernels::avx2_table();
  if (t == nullptr || kernels::detected_isa() != kernels::Isa::Avx2) {
    MESSAGE("AVX2 not available; skipped");
    return;
  }
  check_table(*t);
}

TEST_CASE("scalar and avx2 agree to rounding on every kernel") {
  const auto* v = kernels::avx2_table();
  if (v == nullptr || kernels::detected_isa() != kernels::Isa::Avx2) return;
  const auto& s = kernels::scalar_table();
  for (std::size_t n : {1u, 6u, 31u, 512u, 10007u}) {
    const Data d = make_data(n, 7 * static_cast<unsigned>(n));
    const double es = s.weighted_energy(d.c.data(), d.w.data(), n);
    const double ev = v->weighted_energy(d.c.data(), d.w.data(), n);
    CHECK(std::abs(es - ev) <= 2e-16 * std::abs(es));
    const double ds = s.dot(d.a.data(), d.b.data(), n);
    const double dv = v->dot(d.a.data(), d.b.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(d.a[i] * d.b[i]);
    CHECK(std::abs(ds - dv) <= 2e-16 * mag);

    for (int dim = 1; dim <= 3; ++dim) {
      const int comps = dim * (dim + 1) / 2;
      std::vector<std::vector<double>> dd(comps), g(dim), fs(dim, std::vector<double>(n)), fv(dim, std::vector<double>(n));
      std::mt19937_64 rng(dim);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (auto& c : dd) for (std::size_t i = 0; i < n; ++i) c.push_back(u(rng));
      for (auto& c : g) for (std::size_t i = 0; i < n; ++i) c.push_back(u(rng));
      std::vector<const double*> dp, gp;
      std::vector<double*> fsp, fvp;
      for (auto& c : dd) dp.push_back(c.data());
      for (auto& c : g) gp.push_back(c.data());
      for (auto& c : fs) fsp.push_back(c.data());
      for (auto& c : fv) fvp.push_back(c.data());
      s.flux_product(dim, dp.data(), gp.data(), fsp.data(), n);
      v->flux_product(dim, dp.data(), gp.data(), fvp.data(), n);
      for (int r = 0; r < dim; ++r)
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fs[r][i] - fv[r][i]) <= 4e-16 * 3.0);
    }
  }
}

TEST_CASE("flux product follows the packed upper layout") {
  const auto& s = kernels::scalar_table();
  // D = [[1, 2, 3], [2, 4, 5], [3, 5, 6]], g = (1, 10, 100)
  std::vector<double> d00{1}, d01{2}, d02{3}, d11{4}, d12{5}, d22{6};
  std::vector<double> g0{1}, g1{10}, g2{100}, f0(1), f1(1), f2(1);
  const double* dp[] = {d00.data(), d01.data(), d02.data(), d11.data(), d12.data(), d22.data()};
  const double* gp[] = {g0.data(), g1.data(), g2.data()};
  double* fp[] = {f0.data(), f1.data(), f2.data()};
  s.flux_product(3, dp, gp, fp, 1);
  CHECK(f0[0] == 321.0);
  CHECK(f1[0] == 542.0);
  CHECK(f2[0] == 653.0);
}

TEST_CASE("compensated accumulation survives cancellation") {
  // 1e16 + 1 - 1e16 style cancellation across lanes.
  std::vector<double> a{1e16, 1.0, -1e16, 1.0, 3.0, -3.0, 2.0, 0.5};
  std::vector<double> b(a.size(), 1.0);
  CHECK(kernels::scalar_table().dot(a.data(), b.data(), a.size()) == 4.5);
  if (const auto* v = kernels::avx2_table(); v && kernels::detected_isa() == kernels::Isa::Avx2)
    CHECK(v->dot(a.data(), b.data(), a.size()) == 4.5);
}

TEST_CASE("select switches the active table") {
  const auto original = kernels::active().isa;
  kernels::select(kernels::Isa::Scalar);
  CHECK(kernels::active().isa == kernels::Isa::Scalar);
  if (kernels::detected_isa() == kernels::Isa::Avx2) {
    kernels::select(kernels::Isa::Avx2);
    CHECK(kernels::active().isa == kernels::Isa::Avx2);
  } else {
    CHECK_THROWS_AS(kernels::select(kernels::Isa::Avx2), Error);
  }
  kernels::select(original);
  CHECK(kernels::to_string(kernels::Isa::Scalar) == "scalar");
}
