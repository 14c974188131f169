// AVX2/FMA variants of the hot-loop kernels.  This TU is the only one built
// with -mavx2 -mfma; it must not be entered unless cpu_has_avx2() is true.
#include "kerr/simd.hpp"

#include <immintrin.h>

namespace kerr::simd {

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

// (x0,x1,x2,x3) -> (x0,x0,x1,x1) and (x2,x2,x3,x3): duplicate a real
// coefficient across the re/im lanes of interleaved complex data.
inline __m256d dup_lo(__m256d v) { return _mm256_permute4x64_pd(v, _MM_SHUFFLE(1, 1, 0, 0)); }
inline __m256d dup_hi(__m256d v) { return _mm256_permute4x64_pd(v, _MM_SHUFFLE(3, 3, 2, 2)); }

// Load exactly two doubles p[0], p[1] and spread to (p0, p0, p1, p1); never
// reads past p + 1.
inline __m256d dup_pair(const double* p) {
  const __m128d v = _mm_loadu_pd(p);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(v), _MM_SHUFFLE(1, 1, 0, 0));
}

void v_axpy_cr(double ar, double ai, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_setr_pd(ar, ai, ar, ai);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(x + i);
    __m256d y0 = _mm256_loadu_pd(y + 2 * i);
    __m256d y1 = _mm256_loadu_pd(y + 2 * i + 4);
    y0 = _mm256_fmadd_pd(va, dup_lo(t), y0);
    y1 = _mm256_fmadd_pd(va, dup_hi(t), y1);
    _mm256_storeu_pd(y + 2 * i, y0);
    _mm256_storeu_pd(y + 2 * i + 4, y1);
  }
  for (; i < n; ++i) {
    y[2 * i] += ar * x[i];
    y[2 * i + 1] += ai * x[i];
  }
}

void v_axpy_rr(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_add_scaled(const double* x, double a, const double* k, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(k + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

double v_wsumsq(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_loadu_pd(x + 2 * i);      // z0 z1
    const __m256d d1 = _mm256_loadu_pd(x + 2 * i + 4);  // z2 z3
    // hadd of the squared halves lands as (|z0|^2, |z2|^2, |z1|^2, |z3|^2)
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(d0, d0), _mm256_mul_pd(d1, d1));
    const __m256d wp = _mm256_permute4x64_pd(_mm256_loadu_pd(w + i), _MM_SHUFFLE(3, 1, 2, 0));
    acc = _mm256_fmadd_pd(wp, h, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];  // fixed order
  for (; i < n; ++i)
    total += w[i] * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  return total;
}

void v_wdotc(const double* w, const double* x, const double* y, std::size_t n,
             double* re, double* im) {
  __m256d acc_re = _mm256_setzero_pd(), acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(x + 2 * i);  // xr0 xi0 xr1 xi1
    const __m256d yv = _mm256_loadu_pd(y + 2 * i);
    const __m256d wv = dup_pair(w + i);
    // re: xr*yr + xi*yi ; im: xr*yi - xi*yr
    const __m256d prod_re = _mm256_mul_pd(xv, yv);
    const __m256d yswap = _mm256_shuffle_pd(yv, yv, 0b0101);  // yi0 yr0 yi1 yr1
    const __m256d prod_im = _mm256_mul_pd(xv, yswap);
    acc_re = _mm256_fmadd_pd(wv, prod_re, acc_re);
    acc_im = _mm256_fmadd_pd(wv, prod_im, acc_im);
  }
  alignas(32) double lr[4], li[4];
  _mm256_store_pd(lr, acc_re);
  _mm256_store_pd(li, acc_im);
  double ar = (lr[0] + lr[1]) + (lr[2] + lr[3]);
  double ai = (li[0] - li[1]) + (li[2] - li[3]);
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    ar += w[i] * (xr * yr + xi * yi);
    ai += w[i] * (xr * yi - xi * yr);
  }
  *re = ar;
  *im = ai;
}

void v_stencil_row(const double* cup, const double* cum, const double* ccp,
                   const double* ccm, const double* cd,
                   const double* row_up, const double* row_um,
                   const double* row, double* out, std::size_t nc) {
  auto edge = [&](std::size_t j) {
    for (int p = 0; p < 2; ++p) {
      double v = cd[j] * row[2 * j + p] + cup[j] * row_up[2 * j + p] + cum[j] * row_um[2 * j + p];
      if (j + 1 < nc) v += ccp[j] * row[2 * (j + 1) + p];
      if (j > 0) v += ccm[j] * row[2 * (j - 1) + p];
      out[2 * j + p] = v;
    }
  };
  if (nc < 4) {
    for (std::size_t j = 0; j < nc; ++j) edge(j);
    return;
  }
  edge(0);
  std::size_t j = 1;
  for (; j + 2 <= nc - 1; j += 2) {  // interior pairs, shifted loads are in range
    const __m256d vd = dup_pair(cd + j);
    const __m256d vup = dup_pair(cup + j);
    const __m256d vum = dup_pair(cum + j);
    const __m256d vcp = dup_pair(ccp + j);
    const __m256d vcm = dup_pair(ccm + j);
    __m256d acc = _mm256_mul_pd(vd, _mm256_loadu_pd(row + 2 * j));
    acc = _mm256_fmadd_pd(vup, _mm256_loadu_pd(row_up + 2 * j), acc);
    acc = _mm256_fmadd_pd(vum, _mm256_loadu_pd(row_um + 2 * j), acc);
    acc = _mm256_fmadd_pd(vcp, _mm256_loadu_pd(row + 2 * (j + 1)), acc);
    acc = _mm256_fmadd_pd(vcm, _mm256_loadu_pd(row + 2 * (j - 1)), acc);
    _mm256_storeu_pd(out + 2 * j, acc);
  }
  for (; j < nc; ++j) edge(j);
}

const Kernels g_avx2 = {v_axpy_cr, v_axpy_rr, v_add_scaled, v_wsumsq, v_wdotc,
                        v_stencil_row, "avx2"};

}  // namespace

const Kernels& avx2_kernels() { return g_avx2; }

}  // namespace kerr::simd
