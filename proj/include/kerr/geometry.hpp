#pragma once
#include <utility>

namespace kerr {

// Exterior Kerr background for a fixed azimuthal mode number k.
// Geometric units G = c = 1.
struct KerrBackground {
  double M = 1.0;      // mass
  double a = 0.0;      // specific angular momentum; non-extreme M^2 > a^2
  int    k = 0;        // azimuthal mode number
  double r1 = 2.0;     // outer horizon radius M + sqrt(M^2 - a^2)
  double r2 = 0.0;     // inner horizon radius M - sqrt(M^2 - a^2)
  double omega0 = 0.0; // horizon frequency of mode k: -a k / (r1^2 + a^2)

  KerrBackground() = default;
  KerrBackground(double M_, double a_, int k_);
};

// Horizon function Delta = r^2 - 2 M r + a^2 = (r - r1)(r - r2).
double delta(const KerrBackground& bg, double r);

std::pair<double, double> horizon_radii(double M, double a);

// Tortoise coordinate: u -> -inf at the outer horizon, u ~ r at infinity.
//   u = r + [2 M r1 ln((r-r1)/M) - 2 M r2 ln((r-r2)/M)] / (r1 - r2)
// Requires r > r1.
double tortoise_u(const KerrBackground& bg, double r);

// Inverse of tortoise_u by safeguarded Newton iteration; for u -> -inf the
// result saturates at r1 once r - r1 drops below double resolution.
double inverse_r(const KerrBackground& bg, double u);

// r(u) - r1 without the saturation: near the horizon this is M e^x from the
// log-substituted Newton iterate, accurate down to the underflow limit.
double inverse_r_excess(const KerrBackground& bg, double u);

// Delta - a^2 (1 - costheta^2): negative strictly inside the ergosphere,
// where the conserved energy density of mode k may turn negative.
double ergosphere_indicator(const KerrBackground& bg, double r, double costheta);

}  // namespace kerr
