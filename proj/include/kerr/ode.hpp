#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>

namespace kerr {

// Adaptive embedded Dormand-Prince 5(4) for small complex first-order systems,
// integrating in either direction.  Steps are clipped to land exactly on the
// requested output points (no dense output), which is what the radial solves
// need: values and derivatives on a caller-supplied grid.
//
// RHS signature: void rhs(double u, const State& y, State& dy).
template <std::size_t N>
using OdeState = std::array<std::complex<double>, N>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-3;   // magnitude; sign comes from the direction
  double max_step = 0.0;        // 0 = unlimited
  std::size_t max_steps = 50'000'000;
};

// Integrates from u0 to the last entry of `out_u` (monotone towards it),
// calling `emit(index, u, y)` at every grid point.  `out_u` must be strictly
// monotone in the direction of integration and start at u0.
template <std::size_t N, class Rhs, class Emit>
void integrate_dp45(Rhs&& rhs, OdeState<N> y, std::span<const double> out_u,
                    const OdeOptions& opt, Emit&& emit) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // 4th-order weights for the error estimate
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  if (out_u.size() < 2) throw std::invalid_argument("integrate_dp45: need at least two output points");
  double u = out_u[0];
  const double dir = out_u[out_u.size() - 1] > u ? 1.0 : -1.0;

  OdeState<N> k1, k2, k3, k4, k5, k6, k7, ytmp;
  rhs(u, y, k1);
  emit(std::size_t{0}, u, y);

  double h = dir * std::abs(opt.initial_step);
  std::size_t next_out = 1;
  std::size_t steps = 0;
  while (next_out < out_u.size()) {
    if (++steps > opt.max_steps) throw std::runtime_error("integrate_dp45: step limit exceeded");
    if (opt.max_step > 0.0) h = dir * std::min(std::abs(h), opt.max_step);
    bool clipped = false;
    if ((out_u[next_out] - (u + h)) * dir <= 0.0) {
      h = out_u[next_out] - u;
      clipped = true;
    }
    if (std::abs(h) < 1e-14 * (1.0 + std::abs(u))) {
      // Degenerate clip (coincident grid points): emit current state.
      emit(next_out, out_u[next_out], y);
      ++next_out;
      continue;
    }

    auto stage = [&](double frac, const OdeState<N>& yy, OdeState<N>& kk) { rhs(u + frac * h, yy, kk); };
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a21 * k1[i]);
    stage(c2, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    stage(c3, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    stage(c4, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    stage(c5, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    stage(1.0, ytmp, k6);
    OdeState<N> y5;
    for (std::size_t i = 0; i < N; ++i)
      y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(u + h, y5, k7);  // FSAL

    double errnorm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const std::complex<double> err =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      const double q = std::abs(err) / scale;
      errnorm += q * q;
    }
    errnorm = std::sqrt(errnorm / N);

    if (errnorm <= 1.0) {
      u += h;
      y = y5;
      k1 = k7;
      if (clipped) {
        emit(next_out, u, y);
        ++next_out;
      }
      const double grow = errnorm > 0.0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(errnorm, -0.2));
    }
    if (!(std::abs(h) > 0.0) || !std::isfinite(std::abs(h)))
      throw std::runtime_error("integrate_dp45: step size collapsed");
  }
}

}  // namespace kerr
