#include "kernels_impl.hpp"

#include <cmath>

namespace parabolic::kernels::detail {

namespace {

// Neumaier summation in extended precision.
struct Accumulator {
  long double sum = 0.0L;
  long double carry = 0.0L;

  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return static_cast<double>(sum + carry); }
};

double weighted_energy(const cplx* c, const double* w, std::size_t n) {
  Accumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    const long double re = c[i].real();
    const long double im = c[i].imag();
    acc.add(static_cast<long double>(w[i]) * (re * re + im * im));
  }
  return acc.value();
}

double dot(const double* a, const double* b, std::size_t n) {
  Accumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(static_cast<long double>(a[i]) * b[i]);
  }
  return acc.value();
}

void imag_scale(const cplx* in, const double* k, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cplx(-k[i] * in[i].imag(), k[i] * in[i].real());
  }
}

void diag_scale(const double* a, const cplx* x, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = cplx(a[i] * x[i].real(), a[i] * x[i].imag());
  }
}

void diag_axpy(const double* a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = cplx(y[i].real() + a[i] * x[i].real(), y[i].imag() + a[i] * x[i].imag());
  }
}

void flux_product(int dim, const double* const* d, const double* const* g, double* const* flux,
                  std::size_t n) {
  switch (dim) {
    case 1:
      for (std::size_t i = 0; i < n; ++i) flux[0][i] = d[0][i] * g[0][i];
      break;
    case 2:
      for (std::size_t i = 0; i < n; ++i) {
        flux[0][i] = d[0][i] * g[0][i] + d[1][i] * g[1][i];
        flux[1][i] = d[1][i] * g[0][i] + d[2][i] * g[1][i];
      }
      break;
    case 3:
      for (std::size_t i = 0; i < n; ++i) {
        flux[0][i] = d[0][i] * g[0][i] + d[1][i] * g[1][i] + d[2][i] * g[2][i];
        flux[1][i] = d[1][i] * g[0][i] + d[3][i] * g[1][i] + d[4][i] * g[2][i];
        flux[2][i] = d[2][i] * g[0][i] + d[4][i] * g[1][i] + d[5][i] * g[2][i];
      }
      break;
    default:
      break;
  }
}

}  // namespace

const KernelTable kScalarTable{Isa::Scalar, weighted_energy, dot,          imag_scale,
                               diag_scale,  diag_axpy,       flux_product};

}  // namespace parabolic::kernels::detail
