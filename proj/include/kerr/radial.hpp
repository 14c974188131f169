#pragma once
#include <complex>
#include <span>
#include <vector>

#include "kerr/geometry.hpp"

namespace kerr {

using cplx = std::complex<double>;

// Schroedinger form of the separated radial equation in the tortoise
// coordinate: phi'' = V phi, with
//   V = -(w + a k/s^2)^2 + lambda Delta/s^4
//       + (Delta/s^6) (Delta + r Delta' - 3 r^2 Delta/s^2),     s^2 = r^2 + a^2,
// the last group being the curvature term (1/s) d^2s/du^2 expanded through
// d/du = (Delta/s^2) d/dr.  V -> -Omega^2 exponentially at the horizon
// (Omega = w - w0) and V -> -w^2 + (lambda - 2akw)/r^2 + O(r^-3) far out.
struct RadialPotential {
  KerrBackground bg;
  double omega = 0.0;
  double lambda = 0.0;
  double Omega = 0.0;  // horizon-frame frequency w - w0

  RadialPotential(const KerrBackground& b, double w, double lam)
      : bg(b), omega(w), lambda(lam), Omega(w - b.omega0) {}
};

// V at radius r (r > r1).
double potential_V_of_r(const RadialPotential& pot, double r);

// V at tortoise coordinate u, evaluated in the horizon-excess variable
// r - r1 so that V + Omega^2 underflows cleanly instead of cancelling.
double potential_V(const RadialPotential& pot, double u);

enum class JostSide { horizon, infinity };

// One Jost solution sampled on a caller grid: phi'' = V phi with
//   phi_acute -> e^{+i Omega u}  (u -> -inf,  side = horizon),
//   phi_grave -> e^{-i omega u}  (u -> +inf,  side = infinity).
struct JostSolution {
  std::vector<double> grid;  // the caller's u grid, ascending
  std::vector<cplx> phi;
  std::vector<cplx> dphi;   // d(phi)/du
  JostSide side = JostSide::horizon;
  double anchor_u = 0.0;    // where the boundary form was imposed
  double anchor_freq = 0.0; // Omega (horizon side) or omega (infinity side)
  // Horizon side: achieved |V + Omega^2| at the anchor.  Infinity side:
  // truncation estimate of the 1/r boundary series at the anchor radius.
  double boundary_residual = 0.0;
  bool boundary_degraded = false;  // far anchor radius hit its cap above tol
};

// phi_acute: anchored at u0 < min(grid) where |V(u0) + Omega^2| <
// tol*max(Omega^2, tol), then integrated rightward with adaptive stepping
// (relative tolerance tol).  Throws "spectral point excluded" when |omega|
// or |Omega| is below the 1e-8 floor.
JostSolution jost_acute(const RadialPotential& pot, std::span<const double> u_grid,
                        double tol = 1e-11);

// phi_grave: anchored at r_s >= max(r(max grid) + 20, 50) with the four-term
// expansion phi = e^{-i w u} (1 + b1/r + ... + b4/r^4); r_s grows until the
// series truncation estimate drops below tol (capped at 1e6, reported via
// boundary_degraded), then integrated leftward.
JostSolution jost_grave(const RadialPotential& pot, std::span<const double> u_grid,
                        double tol = 1e-11);

// Connection coefficients phi_grave = alpha phi_acute + beta conj(phi_acute)
// and the derived t-matrix.  t21 = t12 and t11 + t22 = 2 by construction;
// the flux identity |alpha|^2 - |beta|^2 = -omega/Omega holds for real
// frequencies; superradiance (|alpha/beta| > 1) occurs iff omega*Omega < 0.
struct Transmission {
  cplx alpha;
  cplx beta;
  double t11 = 0.0;  // 1 + Re(alpha/beta)
  double t12 = 0.0;  //   - Im(alpha/beta)  (= t21)
  double t22 = 0.0;  // 1 - Re(alpha/beta)
  double omega = 0.0;
  double Omega = 0.0;
  double lambda = 0.0;
};

// alpha = w(phi_grave, conj phi_acute)/(-2i Omega), beta = w(phi_grave,
// phi_acute)/(2i Omega), with w(f,g) = f g' - f' g evaluated at the horizon
// anchor where phi_acute is plane-wave exact.  Throws on |beta| ~ 0
// (numerical breakdown: the Wronskian has no zeros).
Transmission transmission(const RadialPotential& pot, double tol = 1e-11);

// Symmetrized resolvent kernel g(u,u') = phi_acute(u_<) phi_grave(u_>) /
// w(phi_grave, phi_acute).  Its imaginary part satisfies
//   Im g(u,u') = -(1/2 Omega) sum_ab t_ab phi_a(u) phi_b(u'),
// phi_1 = Re phi_acute, phi_2 = Im phi_acute.
cplx greens_kernel(const RadialPotential& pot, double u, double uprime,
                   double tol = 1e-11);

}  // namespace kerr
