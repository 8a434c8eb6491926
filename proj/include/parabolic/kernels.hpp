#pragma once

// Data-parallel inner loops shared by the spectral, evolution and monitor
// code. Every kernel has a scalar reference implementation; an AVX2/FMA
// variant is compiled on x86-64 and selected at runtime when the CPU supports
// it. The two are required to agree to rounding (see tests/test_kernels.cpp).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace parabolic::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i w[i] * |c[i]|^2, compensated
  double (*weighted_energy)(const cplx* c, const double* w, std::size_t n);
  // sum_i a[i] * b[i], compensated
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[i] = i * k[i] * in[i]
  void (*imag_scale)(const cplx* in, const double* k, cplx* out, std::size_t n);
  // out[i] = a[i] * x[i]
  void (*diag_scale)(const double* a, const cplx* x, cplx* out, std::size_t n);
  // y[i] += a[i] * x[i]
  void (*diag_axpy)(const double* a, const cplx* x, cplx* y, std::size_t n);
  // flux_r[i] = sum_c D_rc[i] * g_c[i] for a symmetric dim x dim field stored
  // as upper-triangle component arrays in row order (d00, d01, .., d11, ..).
  void (*flux_product)(int dim, const double* const* d, const double* const* g,
                       double* const* flux, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();

/// Table used by the library. Defaults to detected_isa(), overridable with the
/// PARABOLIC_ISA environment variable (scalar|avx2) or select().
const KernelTable& active();

/// Switch the active table. Throws Error(InvalidArgument) if unsupported.
/// Not synchronized with concurrent kernel calls; meant for tests and startup.
void select(Isa isa);

// Span-level wrappers over active().

double weighted_energy(std::span<const cplx> c, std::span<const double> w);
double dot(std::span<const double> a, std::span<const double> b);
void imag_scale(std::span<const cplx> in, std::span<const double> k, std::span<cplx> out);
void diag_scale(std::span<const double> a, std::span<const cplx> x, std::span<cplx> out);
void diag_axpy(std::span<const double> a, std::span<const cplx> x, std::span<cplx> y);

}  // namespace parabolic::kernels
