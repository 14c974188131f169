// NEON variants of the hot-loop kernels (aarch64).
#include "kerr/simd.hpp"

#include <arm_neon.h>

namespace kerr::simd {

namespace {

void v_axpy_cr(double ar, double ai, const double* x, double* y, std::size_t n) {
  const float64x2_t va = {ar, ai};
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x0 = vdupq_n_f64(x[i]);
    const float64x2_t x1 = vdupq_n_f64(x[i + 1]);
    vst1q_f64(y + 2 * i, vfmaq_f64(vld1q_f64(y + 2 * i), va, x0));
    vst1q_f64(y + 2 * i + 2, vfmaq_f64(vld1q_f64(y + 2 * i + 2), va, x1));
  }
  for (; i < n; ++i) {
    y[2 * i] += ar * x[i];
    y[2 * i + 1] += ai * x[i];
  }
}

void v_axpy_rr(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_add_scaled(const double* x, double a, const double* k, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(k + i)));
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

double v_wsumsq(const double* w, const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t z0 = vld1q_f64(x + 2 * i);
    const float64x2_t z1 = vld1q_f64(x + 2 * i + 2);
    const float64x2_t mags = {vaddvq_f64(vmulq_f64(z0, z0)), vaddvq_f64(vmulq_f64(z1, z1))};
    acc = vfmaq_f64(acc, vld1q_f64(w + i), mags);
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i)
    total += w[i] * (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]);
  return total;
}

void v_wdotc(const double* w, const double* x, const double* y, std::size_t n,
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
  if (nc < 3) {
    for (std::size_t j = 0; j < nc; ++j) edge(j);
    return;
  }
  edge(0);
  for (std::size_t j = 1; j + 1 < nc; ++j) {  // one complex node per iteration
    float64x2_t acc = vmulq_f64(vdupq_n_f64(cd[j]), vld1q_f64(row + 2 * j));
    acc = vfmaq_f64(acc, vdupq_n_f64(cup[j]), vld1q_f64(row_up + 2 * j));
    acc = vfmaq_f64(acc, vdupq_n_f64(cum[j]), vld1q_f64(row_um + 2 * j));
    acc = vfmaq_f64(acc, vdupq_n_f64(ccp[j]), vld1q_f64(row + 2 * (j + 1)));
    acc = vfmaq_f64(acc, vdupq_n_f64(ccm[j]), vld1q_f64(row + 2 * (j - 1)));
    vst1q_f64(out + 2 * j, acc);
  }
  edge(nc - 1);
}

const Kernels g_neon = {v_axpy_cr, v_axpy_rr, v_add_scaled, v_wsumsq, v_wdotc,
                        v_stencil_row, "neon"};

}  // namespace

const Kernels& neon_kernels() { return g_neon; }

}  // namespace kerr::simd
