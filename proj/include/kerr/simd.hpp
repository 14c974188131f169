#pragma once
#include <cstddef>

namespace kerr::simd {

// Hot-loop kernels behind function pointers so the same call sites run the
// scalar reference or a vector variant picked once at startup.  Complex
// arrays are interleaved doubles (re, im); coefficient arrays are real,
// one entry per complex element.
struct Kernels {
  // y[2i] += ar * x[i]; y[2i+1] += ai * x[i]   (synthesis outer products)
  void (*axpy_cr)(double ar, double ai, const double* x, double* y, std::size_t n);
  // y[i] += a * x[i]                            (stage accumulation)
  void (*axpy_rr)(double a, const double* x, double* y, std::size_t n);
  // out[i] = x[i] + a * k[i]                    (stage formation)
  void (*add_scaled)(const double* x, double a, const double* k, double* out, std::size_t n);
  // sum_i w[i] * (x[2i]^2 + x[2i+1]^2)
  double (*wsumsq)(const double* w, const double* x, std::size_t n);
  // sum_i w[i] * conj(x_i) * y_i, complex result in (re, im)
  void (*wdotc)(const double* w, const double* x, const double* y, std::size_t n,
                double* re, double* im);
  // Five-point stencil on one radial row of a complex field, ghost-zero at
  // both angular ends:
  //   out_j = cd_j row_j + cup_j up_j + cum_j um_j + ccp_j row_{j+1} + ccm_j row_{j-1}
  void (*stencil_row)(const double* cup, const double* cum, const double* ccp,
                      const double* ccm, const double* cd,
                      const double* row_up, const double* row_um,
                      const double* row, double* out, std::size_t nc);
  const char* name;
};

const Kernels& scalar_kernels();
const Kernels& active_kernels();   // best available unless forced scalar
void force_scalar_kernels(bool on);
bool vector_kernels_available();   // a vector TU is linked and the CPU supports it

}  // namespace kerr::simd
