// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a
// runtime CPU check.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>

namespace parabolic::kernels::detail {

namespace {

// Four independent TwoSum lanes; the lane totals are merged in extended
// precision at the end.
struct LaneAccumulator {
  __m256d sum = _mm256_setzero_pd();
  __m256d carry = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d bp = _mm256_sub_pd(t, sum);
    const __m256d err =
        _mm256_add_pd(_mm256_sub_pd(sum, _mm256_sub_pd(t, bp)), _mm256_sub_pd(x, bp));
    carry = _mm256_add_pd(carry, err);
    sum = t;
  }

  long double reduce() const {
    alignas(32) double s[4];
    alignas(32) double c[4];
    _mm256_store_pd(s, sum);
    _mm256_store_pd(c, carry);
    long double total = 0.0L;
    for (int i = 0; i < 4; ++i) total += static_cast<long double>(s[i]);
    for (int i = 0; i < 4; ++i) total += static_cast<long double>(c[i]);
    return total;
  }
};

// [k0, k0, k1, k1] from two consecutive reals.
inline __m256d broadcast_pairs(const double* k) {
  const __m128d kk = _mm_loadu_pd(k);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(kk), 0x50);
}

double weighted_energy(const cplx* c, const double* w, std::size_t n) {
  const double* raw = reinterpret_cast<const double*>(c);
  LaneAccumulator acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(raw + 2 * i);
    const __m256d b = _mm256_loadu_pd(raw + 2 * i + 4);
    // [|c0|^2, |c2|^2, |c1|^2, |c3|^2]
    const __m256d mag = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    const __m256d ww = _mm256_permute4x64_pd(_mm256_loadu_pd(w + i), 0xD8);
    acc.add(_mm256_mul_pd(mag, ww));
  }
  long double tail = 0.0L;
  for (; i < n; ++i) {
    const long double re = c[i].real();
    const long double im = c[i].imag();
    tail += static_cast<long double>(w[i]) * (re * re + im * im);
  }
  return static_cast<double>(acc.reduce() + tail);
}

double dot(const double* a, const double* b, std::size_t n) {
  LaneAccumulator acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  long double tail = 0.0L;
  for (; i < n; ++i) tail += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(acc.reduce() + tail);
}

void imag_scale(const cplx* in, const double* k, cplx* out, std::size_t n) {
  const double* src = reinterpret_cast<const double*>(in);
  double* dst = reinterpret_cast<double*>(out);
  const __m256d sign = _mm256_set_pd(1.0, -1.0, 1.0, -1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(src + 2 * i);
    const __m256d swapped = _mm256_permute_pd(v, 0x5);
    const __m256d kk = _mm256_mul_pd(broadcast_pairs(k + i), sign);
    _mm256_storeu_pd(dst + 2 * i, _mm256_mul_pd(swapped, kk));
  }
  for (; i < n; ++i) out[i] = cplx(-k[i] * in[i].imag(), k[i] * in[i].real());
}

void diag_scale(const double* a, const cplx* x, cplx* out, std::size_t n) {
  const double* src = reinterpret_cast<const double*>(x);
  double* dst = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(dst + 2 * i,
                     _mm256_mul_pd(broadcast_pairs(a + i), _mm256_loadu_pd(src + 2 * i)));
  }
  for (; i < n; ++i) out[i] = cplx(a[i] * x[i].real(), a[i] * x[i].imag());
}

void diag_axpy(const double* a, const cplx* x, cplx* y, std::size_t n) {
  const double* src = reinterpret_cast<const double*>(x);
  double* dst = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d acc = _mm256_loadu_pd(dst + 2 * i);
    _mm256_storeu_pd(dst + 2 * i,
                     _mm256_fmadd_pd(broadcast_pairs(a + i), _mm256_loadu_pd(src + 2 * i), acc));
  }
  for (; i < n; ++i) {
    y[i] = cplx(y[i].real() + a[i] * x[i].real(), y[i].imag() + a[i] * x[i].imag());
  }
}

void flux_product(int dim, const double* const* d, const double* const* g, double* const* flux,
                  std::size_t n) {
  std::size_t i = 0;
  switch (dim) {
    case 1:
      for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(flux[0] + i,
                         _mm256_mul_pd(_mm256_loadu_pd(d[0] + i), _mm256_loadu_pd(g[0] + i)));
      }
      for (; i < n; ++i) flux[0][i] = d[0][i] * g[0][i];
      break;
    case 2:
      for (; i + 4 <= n; i += 4) {
        const __m256d g0 = _mm256_loadu_pd(g[0] + i);
        const __m256d g1 = _mm256_loadu_pd(g[1] + i);
        const __m256d d00 = _mm256_loadu_pd(d[0] + i);
        const __m256d d01 = _mm256_loadu_pd(d[1] + i);
        const __m256d d11 = _mm256_loadu_pd(d[2] + i);
        _mm256_storeu_pd(flux[0] + i, _mm256_fmadd_pd(d01, g1, _mm256_mul_pd(d00, g0)));
        _mm256_storeu_pd(flux[1] + i, _mm256_fmadd_pd(d11, g1, _mm256_mul_pd(d01, g0)));
      }
      for (; i < n; ++i) {
        flux[0][i] = d[0][i] * g[0][i] + d[1][i] * g[1][i];
        flux[1][i] = d[1][i] * g[0][i] + d[2][i] * g[1][i];
      }
      break;
    case 3:
      for (; i + 4 <= n; i += 4) {
        const __m256d g0 = _mm256_loadu_pd(g[0] + i);
        const __m256d g1 = _mm256_loadu_pd(g[1] + i);
        const __m256d g2 = _mm256_loadu_pd(g[2] + i);
        const __m256d d00 = _mm256_loadu_pd(d[0] + i);
        const __m256d d01 = _mm256_loadu_pd(d[1] + i);
        const __m256d d02 = _mm256_loadu_pd(d[2] + i);
        const __m256d d11 = _mm256_loadu_pd(d[3] + i);
        const __m256d d12 = _mm256_loadu_pd(d[4] + i);
        const __m256d d22 = _mm256_loadu_pd(d[5] + i);
        _mm256_storeu_pd(flux[0] + i,
                         _mm256_fmadd_pd(d02, g2, _mm256_fmadd_pd(d01, g1, _mm256_mul_pd(d00, g0))));
        _mm256_storeu_pd(flux[1] + i,
                         _mm256_fmadd_pd(d12, g2, _mm256_fmadd_pd(d11, g1, _mm256_mul_pd(d01, g0))));
        _mm256_storeu_pd(flux[2] + i,
                         _mm256_fmadd_pd(d22, g2, _mm256_fmadd_pd(d12, g1, _mm256_mul_pd(d02, g0))));
      }
      for (; i < n; ++i) {
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

const KernelTable kAvx2Table{Isa::Avx2, weighted_energy, dot,          imag_scale,
                             diag_scale, diag_axpy,      flux_product};

}  // namespace parabolic::kernels::detail
