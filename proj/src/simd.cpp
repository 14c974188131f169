#include "kerr/simd.hpp"

#include <atomic>

namespace kerr::simd {

namespace {

void s_axpy_cr(double ar, double ai, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[2 * i] += ar * x[i];
    y[2 * i + 1] += ai * x[i];
  }
}

void s_axpy_rr(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_add_scaled(const double* x, double a, const double* k, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

double s_wsumsq(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  return acc;
}

void s_wdotc(const double* w, const double* x, const double* y, std::size_t n,
             double* re, double* im) {
  double ar = 0.0, ai = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    const double yr = y[2 * i], yi = y[2 * i + 1];
    ar += w[i] * (xr * yr + xi * yi);
    ai += w[i] * (xr * yi - xi * yr);
  }
  *re = ar;
  *im = ai;
}

void s_stencil_row(const double* cup, const double* cum, const double* ccp,
                   const double* ccm, const double* cd,
                   const double* row_up, const double* row_um,
                   const double* row, double* out, std::size_t nc) {
  for (std::size_t j = 0; j < nc; ++j) {
    for (int p = 0; p < 2; ++p) {
      double v = cd[j] * row[2 * j + p] + cup[j] * row_up[2 * j + p] + cum[j] * row_um[2 * j + p];
      if (j + 1 < nc) v += ccp[j] * row[2 * (j + 1) + p];
      if (j > 0) v += ccm[j] * row[2 * (j - 1) + p];
      out[2 * j + p] = v;
    }
  }
}

const Kernels g_scalar = {s_axpy_cr, s_axpy_rr, s_add_scaled, s_wsumsq, s_wdotc,
                          s_stencil_row, "scalar"};

std::atomic<bool> g_force_scalar{false};

}  // namespace

const Kernels& scalar_kernels() { return g_scalar; }

#if defined(KERR_HAVE_AVX2_TU)
const Kernels& avx2_kernels();  // simd_avx2.cpp
bool cpu_has_avx2();
#endif
#if defined(KERR_HAVE_NEON_TU)
const Kernels& neon_kernels();  // simd_neon.cpp
#endif

bool vector_kernels_available() {
#if defined(KERR_HAVE_AVX2_TU)
  return cpu_has_avx2();
#elif defined(KERR_HAVE_NEON_TU)
  return true;
#else
  return false;
#endif
}

void force_scalar_kernels(bool on) { g_force_scalar.store(on); }

const Kernels& active_kernels() {
  if (g_force_scalar.load()) return g_scalar;
#if defined(KERR_HAVE_AVX2_TU)
  if (cpu_has_avx2()) return avx2_kernels();
#elif defined(KERR_HAVE_NEON_TU)
  return neon_kernels();
#endif
  return g_scalar;
}

}  // namespace kerr::simd
