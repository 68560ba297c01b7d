#include "cvrep/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace cvrep::simd::avx2 {
namespace {

// Two complex doubles per __m256d: [re0, im0, re1, im1].

void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs));
    _mm256_storeu_pd(yp + 2 * k, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * k), prod));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void raxpy(double w, const cplx* x, cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  const std::size_t m = 2 * n;
  const __m256d wv = _mm256_set1_pd(w);
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    _mm256_storeu_pd(yp + k, _mm256_fmadd_pd(wv, _mm256_loadu_pd(xp + k), _mm256_loadu_pd(yp + k)));
  }
  for (; k < m; ++k) yp[k] += w * xp[k];
}

void cscale(cplx alpha, cplx* x, std::size_t n) {
  double* xp = reinterpret_cast<double*>(x);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d xs = _mm256_permute_pd(xv, 0b0101);
    _mm256_storeu_pd(xp + 2 * k, _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, xs)));
  }
  for (; k < n; ++k) x[k] *= alpha;
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double norm2(const cplx* x, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= m; k += 4) {
    const __m256d v = _mm256_loadu_pd(xp + k);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; k < m; ++k) s += xp[k] * xp[k];
  return s;
}

cplx cdotc(const cplx* x, const cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  // re = sum xr*yr + xi*yi ; im = sum xr*yi - xi*yr
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * k);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
    acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_im);
  }
  // acc_im lanes hold [xr*yi, xi*yr, ...]; odd lanes enter with a minus sign.
  alignas(32) double im_lanes[4];
  _mm256_store_pd(im_lanes, acc_im);
  cplx s{hsum(acc_re), im_lanes[0] - im_lanes[1] + im_lanes[2] - im_lanes[3]};
  for (; k < n; ++k) s += std::conj(x[k]) * y[k];
  return s;
}

const Kernels kTable{caxpy, raxpy, cscale, norm2, cdotc};

}  // namespace

const Kernels* kernels() { return &kTable; }

}  // namespace cvrep::simd::avx2

#else

namespace cvrep::simd::avx2 {
const Kernels* kernels() { return nullptr; }
}  // namespace cvrep::simd::avx2

#endif
